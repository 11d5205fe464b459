#include "merw/tfim.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include <fmt/format.h>

#include "merw/errors.hpp"
#include "merw/parallel.hpp"
#include "merw/rng.hpp"

namespace merw {

AngleGrid AngleGrid::uniform(int lat) {
  if (lat < 4) throw std::invalid_argument("angle grid needs lat >= 4");
  AngleGrid g;
  g.lat = lat;
  g.angles.resize(static_cast<std::size_t>(lat));
  for (int k = 1; k <= lat; ++k) g.angles[static_cast<std::size_t>(k - 1)] = 2.0 * std::numbers::pi * k / lat;
  return g;
}

double tfim_bond_energy(double J, double h, double a, double b) {
  return -J * std::sin(a) * std::sin(b) - h * (std::cos(a) + std::cos(b)) / 2.0;
}

JointAngleDistribution tfim_joint(double J, double h, int lat, const SolverOptions& options) {
  if (lat > kTfimDenseLimit) {
    throw CapacityError(fmt::format("angle grid of {} points exceeds the dense limit {}", lat, kTfimDenseLimit));
  }
  if (!std::isfinite(J) || !std::isfinite(h)) throw std::invalid_argument("J and h must be finite");
  JointAngleDistribution out;
  out.grid = AngleGrid::uniform(lat);
  out.J = J;
  out.h = h;
  const std::size_t n = static_cast<std::size_t>(lat);

  std::vector<double> m(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      m[i * n + j] = std::exp(-tfim_bond_energy(J, h, out.grid.angles[i], out.grid.angles[j]));

  const MatVec apply = [&m, n](std::span<const double> x, std::span<double> y) {
    for (std::size_t i = 0; i < n; ++i) {
      const double* row = m.data() + i * n;
      double s = 0.0;
      for (std::size_t j = 0; j < n; ++j) s += row[j] * x[j];
      y[i] = s;
    }
  };
  SpectralSolution sol = power_iteration(n, apply, std::vector<double>(n, 1.0), options);
  make_perron(sol, n, apply);

  out.lambda = sol.lambda;
  out.prob.resize(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) out.prob[i * n + j] = sol.psi[i] * m[i * n + j] * sol.psi[j] / sol.lambda;
  const double total = pairwise_sum(out.prob);
  for (double& p : out.prob) p /= total;
  return out;
}

std::vector<double> JointAngleDistribution::row_marginal() const {
  const std::size_t n = static_cast<std::size_t>(grid.lat);
  std::vector<double> out(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) out[i] = pairwise_sum(std::span(prob).subspan(i * n, n));
  return out;
}

std::vector<double> JointAngleDistribution::col_marginal() const {
  const std::size_t n = static_cast<std::size_t>(grid.lat);
  std::vector<double> out(n, 0.0);
  std::vector<double> column(n);
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t i = 0; i < n; ++i) column[i] = prob[i * n + j];
    out[j] = pairwise_sum(column);
  }
  return out;
}

std::vector<double> JointAngleDistribution::conditional() const {
  const std::size_t n = static_cast<std::size_t>(grid.lat);
  std::vector<double> out(prob);
  const std::vector<double> rows = row_marginal();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) out[i * n + j] = rows[i] > 0.0 ? prob[i * n + j] / rows[i] : 1.0 / n;
  return out;
}

namespace {

int draw(std::span<const double> weights, double u) {
  double acc = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    acc += weights[i];
    if (u < acc) return static_cast<int>(i);
  }
  return static_cast<int>(weights.size()) - 1;
}

}  // namespace

std::vector<int> sample_angle_chain(const JointAngleDistribution& joint, std::size_t length, std::uint64_t seed) {
  std::vector<int> out;
  if (length == 0) return out;
  const std::size_t n = static_cast<std::size_t>(joint.grid.lat);
  const std::vector<double> cond = joint.conditional();
  const std::vector<double> start = joint.row_marginal();
  Rng rng(seed);
  out.reserve(length);
  out.push_back(draw(start, rng.uniform01()));
  while (out.size() < length) {
    const std::size_t prev = static_cast<std::size_t>(out.back());
    out.push_back(draw(std::span(cond).subspan(prev * n, n), rng.uniform01()));
  }
  return out;
}

}  // namespace merw
