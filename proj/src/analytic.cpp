#include "merw/analytic.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <queue>
#include <stdexcept>
#include <vector>

#include <boost/math/quadrature/tanh_sinh.hpp>

namespace merw {

namespace {

constexpr std::array<double, 8> kXgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr std::array<double, 8> kWgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
// 7-point Gauss weights at kXgk[1], [3], [5], [7].
constexpr std::array<double, 4> kWg = {0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
                                       0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Segment {
  double a, b, value, error;
  bool operator<(const Segment& o) const { return error < o.error; }
};

Segment gk15(const std::function<double(double)>& f, double a, double b) {
  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const double fc = f(center);
  double kronrod = fc * kWgk[7];
  double gauss = fc * kWg[3];
  for (int i = 0; i < 7; ++i) {
    const double dx = half * kXgk[static_cast<std::size_t>(i)];
    const double pair = f(center - dx) + f(center + dx);
    kronrod += kWgk[static_cast<std::size_t>(i)] * pair;
    if (i % 2 == 1) gauss += kWg[static_cast<std::size_t>(i / 2)] * pair;
  }
  return Segment{a, b, kronrod * half, std::abs((kronrod - gauss) * half)};
}

constexpr double kCriticalBand = 1e-8;

struct Integrals {
  QuadratureResult elliptic;  // int_0^{pi/2} dtheta / sqrt(1 - kappa^2 sin^2)
  QuadratureResult free;      // int_0^{pi} ln(cosh^2(2bJ) + sqrt(1 + k^2 - 2k cos 2theta) / k)
};

}  // namespace

QuadratureResult integrate_gauss_kronrod(const std::function<double(double)>& f, double a, double b,
                                         double abs_tol, int max_intervals) {
  std::priority_queue<Segment> heap;
  Segment first = gk15(f, a, b);
  heap.push(first);
  double total = first.value;
  double error = first.error;
  int intervals = 1;
  while (error > abs_tol && intervals < max_intervals) {
    const Segment worst = heap.top();
    heap.pop();
    const double m = 0.5 * (worst.a + worst.b);
    const Segment left = gk15(f, worst.a, m);
    const Segment right = gk15(f, m, worst.b);
    total += left.value + right.value - worst.value;
    error += left.error + right.error - worst.error;
    heap.push(left);
    heap.push(right);
    ++intervals;
  }
  // Re-sum from the leaves to shed the running-update round-off.
  double sum = 0.0;
  double err = 0.0;
  std::vector<Segment> leaves;
  while (!heap.empty()) {
    leaves.push_back(heap.top());
    heap.pop();
  }
  std::sort(leaves.begin(), leaves.end(), [](const Segment& x, const Segment& y) { return x.a < y.a; });
  for (const Segment& s : leaves) {
    sum += s.value;
    err += s.error;
  }
  return QuadratureResult{sum, err, intervals};
}

namespace {

Integrals integrate(double J, double beta, QuadratureRule rule) {
  const double s = std::sinh(2.0 * beta * J);
  const double k = 1.0 / (s * s);
  const double kappa2 = 4.0 * k / ((1.0 + k) * (1.0 + k));
  const double c = std::cosh(2.0 * beta * J);
  auto elliptic = [kappa2](double th) {
    const double sn = std::sin(th);
    return 1.0 / std::sqrt(std::max(1.0 - kappa2 * sn * sn, 0.0));
  };
  auto free = [k, c](double th) {
    return std::log(c * c + std::sqrt(std::max(1.0 + k * k - 2.0 * k * std::cos(2.0 * th), 0.0)) / k);
  };
  Integrals out;
  const double pi = std::numbers::pi;
  if (rule == QuadratureRule::gauss_kronrod) {
    out.elliptic = integrate_gauss_kronrod(elliptic, 0.0, pi / 2.0, 1e-13, 20000);
    out.free = integrate_gauss_kronrod(free, 0.0, pi, 1e-13, 4000);
  } else {
    boost::math::quadrature::tanh_sinh<double> integrator;
    double err = 0.0;
    double l1 = 0.0;
    out.elliptic.value = integrator.integrate(elliptic, 0.0, pi / 2.0, 1e-15, &err, &l1);
    out.elliptic.error = err * std::abs(out.elliptic.value);
    out.free.value = integrator.integrate(free, 0.0, pi, 1e-15, &err, &l1);
    out.free.error = err * std::abs(out.free.value);
  }
  return out;
}

}  // namespace

ExactUH exact_uh(double J, double beta, QuadratureRule rule) {
  if (!(J >= 0.0) || !std::isfinite(J)) throw std::invalid_argument("exact_uh needs J >= 0");
  if (!(beta > 0.0) || !std::isfinite(beta)) throw std::invalid_argument("exact_uh needs beta > 0");
  ExactUH out;
  out.J = J;
  out.beta = beta;
  if (J == 0.0) {
    out.U = 0.0;
    out.H = 1.0;
    return out;
  }
  const double pi = std::numbers::pi;
  const double ln2 = std::numbers::ln2;
  const double x = 2.0 * beta * J;
  const double t = std::tanh(x);
  const double coth = 1.0 / t;
  out.near_critical = std::abs(std::sinh(x) - 1.0) < kCriticalBand;

  const Integrals in = integrate(J, beta, rule);
  const double coefficient = (2.0 / pi) * (2.0 * t * t - 1.0);
  double elliptic_term = coefficient * in.elliptic.value;
  double u_error = J * coth * std::abs(coefficient) * in.elliptic.error;
  if (out.near_critical) {
    // The coefficient vanishes like (J - Jc) while the elliptic integral
    // diverges only logarithmically; drop the product and charge its size.
    u_error += J * coth * std::abs(elliptic_term);
    elliptic_term = 0.0;
  }
  out.U = -J * coth * (1.0 + elliptic_term);
  const double F = -ln2 / (2.0 * beta) - in.free.value / (2.0 * pi * beta);
  const double f_error = in.free.error / (2.0 * pi * beta);
  out.H = beta * (out.U - F) / ln2;
  out.quadrature_error = std::max(u_error, beta * (u_error + f_error) / ln2);
  return out;
}

double critical_coupling(double beta) {
  if (!(beta > 0.0)) throw std::invalid_argument("beta must be > 0");
  double lo = 0.0;
  double hi = 1.0 / beta;
  for (int i = 0; i < 200 && hi - lo > 0.0; ++i) {
    const double m = 0.5 * (lo + hi);
    if (m == lo || m == hi) break;
    (std::sinh(2.0 * beta * m) < 1.0 ? lo : hi) = m;
  }
  return 0.5 * (lo + hi);
}

}  // namespace merw
