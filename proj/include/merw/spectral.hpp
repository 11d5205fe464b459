#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace merw {

struct SolverOptions {
  double tol = 1e-13;  // relative residual ||M psi - lambda psi|| / lambda
  int max_iter = 100000;
  double shift = 0.0;  // iterate with M + shift*I
  // when shift is 0, iterate with M + ||Mx||/2 * I; needs a nonnegative matrix
  // (so lambda_min >= -lambda_max) and keeps a near -lambda_max eigenvalue from stalling
  bool auto_shift = true;
};

struct SpectralSolution {
  double lambda = 0.0;
  std::vector<double> psi;  // entrywise >= 0, sum of squares 1
  int iterations = 0;
  double residual = 0.0;
};

using MatVec = std::function<void(std::span<const double>, std::span<double>)>;

// Shifted power iteration with Rayleigh-quotient eigenvalue estimate.
// Returns the converged pair without any sign post-processing.
// Throws ConvergenceError after max_iter iterations.
SpectralSolution power_iteration(std::size_t n, const MatVec& apply, std::vector<double> start,
                                 const SolverOptions& options);

// Entrywise |psi|, renormalized to unit sum of squares, with the residual
// re-evaluated for the final vector.
void make_perron(SpectralSolution& sol, std::size_t n, const MatVec& apply);

}  // namespace merw
