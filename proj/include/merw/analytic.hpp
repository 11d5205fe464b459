#pragma once

#include <functional>

namespace merw {

// Exact per-node energy and entropy of the zero-field square-lattice Ising
// model with isotropic coupling J (Onsager).
struct ExactUH {
  double U = 0.0;
  double H = 0.0;  // bits per node
  double J = 0.0;
  double beta = 1.0;
  double quadrature_error = 0.0;  // estimated absolute error on U and H
  bool near_critical = false;     // |sinh(2 beta J) - 1| < 1e-8: reduced accuracy
};

enum class QuadratureRule { gauss_kronrod, tanh_sinh };

struct QuadratureResult {
  double value = 0.0;
  double error = 0.0;
  int intervals = 0;
};

// Globally adaptive 7/15-point Gauss-Kronrod: bisects the interval with the
// largest error estimate until the summed estimate drops below abs_tol.
QuadratureResult integrate_gauss_kronrod(const std::function<double(double)>& f, double a, double b,
                                         double abs_tol = 1e-13, int max_intervals = 4000);

// J >= 0, beta > 0. J == 0 returns exactly {U = 0, H = 1}.
ExactUH exact_uh(double J, double beta = 1.0, QuadratureRule rule = QuadratureRule::gauss_kronrod);

// Root of sinh(2 beta J) = 1 by bisection.
double critical_coupling(double beta = 1.0);

}  // namespace merw
