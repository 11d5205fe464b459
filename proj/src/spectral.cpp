#include "merw/spectral.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include <fmt/format.h>

#include "merw/errors.hpp"
#include "merw/parallel.hpp"

namespace merw {

namespace {

void scale(std::span<double> x, double s) {
  for (double& v : x) v *= s;
}

double residual_of(std::span<const double> x, std::span<const double> mx, double lambda,
                   std::vector<double>& work) {
  work.resize(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) work[i] = mx[i] - lambda * x[i];
  return norm2(work) / std::abs(lambda);
}

}  // namespace

SpectralSolution power_iteration(std::size_t n, const MatVec& apply, std::vector<double> start,
                                 const SolverOptions& options) {
  if (start.size() != n) throw std::invalid_argument("start vector has wrong length");
  if (!(options.tol > 0.0)) throw std::invalid_argument("tolerance must be positive");
  if (options.max_iter < 1) throw std::invalid_argument("max_iter must be >= 1");

  std::vector<double> x = std::move(start);
  const double n0 = norm2(x);
  if (!(n0 > 0.0) || !std::isfinite(n0)) throw std::invalid_argument("start vector is zero");
  scale(x, 1.0 / n0);

  std::vector<double> y(n);
  std::vector<double> work;
  double residual = INFINITY;
  for (int it = 1; it <= options.max_iter; ++it) {
    apply(x, y);
    double shift = options.shift;
    if (shift == 0.0 && options.auto_shift) shift = 0.5 * norm2(y);
    if (shift != 0.0) {
      for (std::size_t i = 0; i < n; ++i) y[i] += shift * x[i];
    }
    const double shifted = pairwise_dot(x, y);
    const double lambda = shifted - shift;
    if (!(lambda > 0.0) || !std::isfinite(lambda)) {
      throw ConvergenceError(fmt::format("power iteration produced non-positive eigenvalue {}", lambda),
                             it, residual);
    }
    residual = residual_of(x, y, shifted, work) * std::abs(shifted) / lambda;
    if (residual <= options.tol) {
      SpectralSolution sol;
      sol.lambda = lambda;
      sol.psi = std::move(x);
      sol.iterations = it;
      sol.residual = residual;
      return sol;
    }
    const double ny = norm2(y);
    if (!(ny > 0.0) || !std::isfinite(ny)) {
      throw ConvergenceError("power iteration vector vanished or overflowed", it, residual);
    }
    for (std::size_t i = 0; i < n; ++i) x[i] = y[i] / ny;
  }
  throw ConvergenceError(fmt::format("power iteration did not converge in {} iterations (last residual {:.3e})",
                                     options.max_iter, residual),
                         options.max_iter, residual);
}

void make_perron(SpectralSolution& sol, std::size_t n, const MatVec& apply) {
  for (double& v : sol.psi) v = std::abs(v);
  const double nrm = norm2(sol.psi);
  scale(sol.psi, 1.0 / nrm);
  std::vector<double> y(n);
  std::vector<double> work;
  apply(sol.psi, y);
  sol.residual = residual_of(sol.psi, y, sol.lambda, work);
}

}  // namespace merw
