#include <doctest.h>

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "merw/analytic.hpp"

using namespace merw;

namespace {

// U through the complete elliptic integral of the first kind with modulus
// kappa = 2 sinh(2K) / cosh^2(2K).
double energy_via_ellint(double J, double beta) {
  const double t = 2 * beta * J;
  const double kappa = 2 * std::sinh(t) / (std::cosh(t) * std::cosh(t));
  const double th = std::tanh(t);
  return -J / std::tanh(t) * (1 + (2 / std::numbers::pi) * (2 * th * th - 1) * std::comp_ellint_1(kappa));
}

}  // namespace

TEST_CASE("zero coupling is exact") {
  const auto r = exact_uh(0.0);
  CHECK(r.U == 0.0);
  CHECK(r.H == 1.0);
  const auto t = exact_uh(0.0, 2.0, QuadratureRule::tanh_sinh);
  CHECK(t.U == 0.0);
  CHECK(t.H == 1.0);
}

TEST_CASE("reference values at J = 0.2") {
  // 30-digit evaluation of the double-integral free energy and its derivative.
  const auto r = exact_uh(0.2);
  CHECK(std::abs(r.U - -0.0856457666480696) < 1e-12);
  CHECK(std::abs(r.H - 0.936143237434894) < 1e-12);
  CHECK(r.quadrature_error < 1e-11);
  CHECK_FALSE(r.near_critical);
}

TEST_CASE("two quadrature rules agree") {
  for (double J : {0.05, 0.2, 0.3, 0.43, 0.45, 0.6, 1.0, 2.0}) {
    const auto a = exact_uh(J, 1.0, QuadratureRule::gauss_kronrod);
    const auto b = exact_uh(J, 1.0, QuadratureRule::tanh_sinh);
    CHECK(std::abs(a.U - b.U) < 1e-10);
    CHECK(std::abs(a.H - b.H) < 1e-10);
  }
}

TEST_CASE("energy agrees with the standard elliptic integral") {
  for (double J : {0.1, 0.2, 0.35, 0.5, 0.8, 1.5}) {
    for (double beta : {0.7, 1.0}) CHECK(std::abs(exact_uh(J, beta).U - energy_via_ellint(J, beta)) < 1e-12);
  }
}

TEST_CASE("beta enters only through beta J for U / J and H") {
  const auto a = exact_uh(0.3, 2.0);
  const auto b = exact_uh(0.6, 1.0);
  CHECK(a.H == doctest::Approx(b.H).epsilon(1e-12));
  CHECK(a.U / 0.3 == doctest::Approx(b.U / 0.6).epsilon(1e-12));
}

TEST_CASE("critical coupling") {
  const double jc = critical_coupling();
  CHECK(std::abs(jc - std::asinh(1.0) / 2) < 1e-13);
  CHECK(std::abs(jc - 0.4407) < 1e-4);
  CHECK(critical_coupling(2.0) == doctest::Approx(jc / 2).epsilon(1e-12));
  CHECK_THROWS_AS(critical_coupling(0.0), std::invalid_argument);
}

TEST_CASE("behaviour at the critical point") {
  const double jc = critical_coupling();
  const auto at = exact_uh(jc);
  CHECK(at.near_critical);
  CHECK(std::isfinite(at.U));
  CHECK(std::isfinite(at.H));
  // U is continuous through J_c (only its derivative diverges)
  const auto below = exact_uh(jc - 1e-7);
  const auto above = exact_uh(jc + 1e-7);
  CHECK_FALSE(below.near_critical);
  CHECK(std::abs(at.U - below.U) < 1e-4);
  CHECK(std::abs(at.U - above.U) < 1e-4);
  // the elliptic term vanishes: U = -J coth(2 J) = -sqrt(2) J
  CHECK(std::abs(at.U + std::sqrt(2.0) * jc) < 1e-8);
}

TEST_CASE("shape of the curves") {
  double prev_h = 1.0 + 1e-12;
  for (int i = 0; i <= 60; ++i) {
    const double J = 0.05 * i;
    const auto r = exact_uh(J);
    CHECK(r.H <= prev_h + 1e-12);
    CHECK(r.H >= 0.0);
    CHECK(r.H <= 1.0);
    CHECK(r.U <= 0.0);
    prev_h = r.H;
  }
  CHECK(std::abs(exact_uh(3.0).U / (-2 * 3.0) - 1) <= 1e-3);
}

TEST_CASE("invalid inputs") {
  CHECK_THROWS_AS(exact_uh(-0.1), std::invalid_argument);
  CHECK_THROWS_AS(exact_uh(0.1, 0.0), std::invalid_argument);
}

TEST_CASE("Gauss-Kronrod integrator") {
  auto r = integrate_gauss_kronrod([](double x) { return std::sin(x); }, 0, std::numbers::pi);
  CHECK(std::abs(r.value - 2.0) < 1e-14);
  r = integrate_gauss_kronrod([](double x) { return std::sqrt(x); }, 0, 1, 1e-13, 4000);
  CHECK(std::abs(r.value - 2.0 / 3.0) < 1e-12);
  CHECK(r.intervals > 1);
  r = integrate_gauss_kronrod([](double x) { return std::log(x); }, 0, 1, 1e-12, 4000);
  CHECK(std::abs(r.value + 1.0) < 1e-10);
}
