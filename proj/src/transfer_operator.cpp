#include "merw/transfer_operator.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <deque>
#include <stdexcept>

#include <fmt/format.h>

#include "merw/errors.hpp"
#include "merw/parallel.hpp"

namespace merw {

namespace {

constexpr int kReachabilityMaxWidth = 14;

double vertical_energy(PatternIndex u, PatternIndex v, int width, const LocalEnergies& e) {
  const PatternIndex mask = static_cast<PatternIndex>((std::uint64_t{1} << width) - 1);
  const int n11 = std::popcount(u & v);
  const int n10 = std::popcount(u & ~v & mask);
  const int n01 = std::popcount(~u & v & mask);
  const int n00 = width - n11 - n10 - n01;
  double total = 0.0;
  if (n00 > 0) total += n00 * e.vbond[0][0];
  if (n01 > 0) total += n01 * e.vbond[0][1];
  if (n10 > 0) total += n10 * e.vbond[1][0];
  if (n11 > 0) total += n11 * e.vbond[1][1];
  return total;
}

double mib(std::size_t doubles) { return static_cast<double>(doubles) * sizeof(double) / (1024.0 * 1024.0); }

}  // namespace

TransferOperator TransferOperator::build(const ModelParams& params, const InteractionSpec& spec,
                                         Representation representation, const OperatorLimits& limits) {
  params.validate();
  const int w = params.width;
  if (representation == Representation::dense && w > limits.dense_max_width) {
    const std::size_t n = pattern_count(w);
    throw CapacityError(fmt::format(
        "dense transfer matrix for width {} needs {:.0f} MiB ({}x{} doubles); dense limit is width {}", w,
        mib(n * n), n, n, limits.dense_max_width));
  }
  if (w > limits.implicit_max_width) {
    throw CapacityError(fmt::format(
        "implicit transfer operator for width {} needs {:.0f} MiB per state vector; limit is width {}", w,
        mib(pattern_count(w)), limits.implicit_max_width));
  }

  TransferOperator op;
  op.params_ = params;
  op.spec_ = spec;
  op.representation_ = representation;

  const LocalEnergies e = spec.energies(params);
  const std::vector<double> energies = all_pattern_energies(params, spec);
  const std::size_t n = energies.size();
  op.half_.resize(n);
  for (std::size_t u = 0; u < n; ++u) op.half_[u] = std::exp(-params.beta * energies[u] / 2.0);
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) op.kernel_[a][b] = std::exp(-params.beta * e.vbond[a][b]);

  if (representation == Representation::dense) {
    op.dense_.resize(n * n);
    parallel_for(
        n,
        [&](std::size_t begin, std::size_t end) {
          for (std::size_t u = begin; u < end; ++u) {
            double* row = op.dense_.data() + u * n;
            for (std::size_t v = 0; v < n; ++v) {
              const double total = energies[u] / 2.0 +
                                   vertical_energy(static_cast<PatternIndex>(u), static_cast<PatternIndex>(v), w, e) +
                                   energies[v] / 2.0;
              row[v] = std::exp(-params.beta * total);
            }
          }
        },
        64);
  }
  return op;
}

double TransferOperator::entry(PatternIndex u, PatternIndex v) const {
  const std::size_t n = dimension();
  if (u >= n || v >= n) throw std::out_of_range("pattern index out of range");
  if (representation_ == Representation::dense) return dense_[u * n + v];
  double k = half_[u] * half_[v];
  const int w = params_.width;
  for (int p = 0; p < w; ++p) {
    const int shift = w - 1 - p;
    k *= kernel_[(u >> shift) & 1u][(v >> shift) & 1u];
  }
  return k;
}

void TransferOperator::apply(std::span<const double> x, std::span<double> y) const {
  const std::size_t n = dimension();
  if (x.size() != n || y.size() != n) throw std::invalid_argument("matvec dimension mismatch");

  if (representation_ == Representation::dense) {
    parallel_for(
        n,
        [&](std::size_t begin, std::size_t end) {
          for (std::size_t u = begin; u < end; ++u) {
            const double* row = dense_.data() + u * n;
            double s = 0.0;
            for (std::size_t v = 0; v < n; ++v) s += row[v] * x[v];
            y[u] = s;
          }
        },
        256);
    return;
  }

  for (std::size_t i = 0; i < n; ++i) y[i] = half_[i] * x[i];
  const double k00 = kernel_[0][0], k01 = kernel_[0][1], k10 = kernel_[1][0], k11 = kernel_[1][1];
  for (int bit = 0; bit < params_.width; ++bit) {
    const std::size_t stride = std::size_t{1} << bit;
    parallel_for(n, [&](std::size_t begin, std::size_t end) {
      for (std::size_t i = begin; i < end; ++i) {
        if (i & stride) continue;
        const std::size_t j = i | stride;
        const double a = y[i];
        const double b = y[j];
        y[i] = k00 * a + k01 * b;
        y[j] = k10 * a + k11 * b;
      }
    });
  }
  for (std::size_t i = 0; i < n; ++i) y[i] *= half_[i];
}

bool TransferOperator::kernel_positive(PatternIndex u, PatternIndex v) const {
  const PatternIndex mask = static_cast<PatternIndex>((std::uint64_t{1} << params_.width) - 1);
  if (kernel_[1][1] == 0.0 && (u & v) != 0) return false;
  if (kernel_[1][0] == 0.0 && (u & ~v & mask) != 0) return false;
  if (kernel_[0][1] == 0.0 && (~u & v & mask) != 0) return false;
  if (kernel_[0][0] == 0.0 && (~u & ~v & mask) != 0) return false;
  return true;
}

bool TransferOperator::irreducible() const {
  const std::size_t n = dimension();
  std::vector<PatternIndex> allowed;
  for (std::size_t u = 0; u < n; ++u)
    if (half_[u] > 0.0) allowed.push_back(static_cast<PatternIndex>(u));
  if (allowed.empty()) return false;

  const bool complete = std::all_of(&kernel_[0][0], &kernel_[0][0] + 4, [](double k) { return k > 0.0; });
  if (complete) return true;
  if (params_.width > kReachabilityMaxWidth) return true;

  std::vector<char> seen(n, 0);
  std::deque<PatternIndex> queue{allowed.front()};
  seen[allowed.front()] = 1;
  std::size_t visited = 1;
  while (!queue.empty()) {
    const PatternIndex u = queue.front();
    queue.pop_front();
    for (PatternIndex v : allowed) {
      if (seen[v] || !kernel_positive(u, v)) continue;
      seen[v] = 1;
      ++visited;
      queue.push_back(v);
    }
  }
  return visited == allowed.size();
}

SpectralSolution dominant_eigenpair(const TransferOperator& op, const SolverOptions& options) {
  if (!op.symmetric()) {
    throw std::invalid_argument("pair probabilities need a symmetric transfer operator (vbond[0][1] != vbond[1][0])");
  }
  if (!op.irreducible()) {
    throw ReducibleOperatorError(
        fmt::format("transfer operator at width {} is reducible: allowed patterns form a disconnected graph", op.width()));
  }
  const std::size_t n = op.dimension();
  std::vector<double> start(n);
  const auto half = op.half_weights();
  for (std::size_t u = 0; u < n; ++u) start[u] = half[u] > 0.0 ? 1.0 : 0.0;

  const MatVec apply = [&op](std::span<const double> x, std::span<double> y) { op.apply(x, y); };
  SpectralSolution sol = power_iteration(n, apply, std::move(start), options);
  make_perron(sol, n, apply);
  return sol;
}

std::vector<double> pattern_prob(const SpectralSolution& sol) {
  std::vector<double> p(sol.psi.size());
  for (std::size_t i = 0; i < p.size(); ++i) p[i] = sol.psi[i] * sol.psi[i];
  return p;
}

PairDistribution::PairDistribution(int width, std::vector<double> p) : width_(width), p_(std::move(p)) {
  if (p_.size() != dimension() * dimension()) throw std::invalid_argument("pair distribution size mismatch");
}

PairDistribution pair_prob(const SpectralSolution& sol, const TransferOperator& op) {
  const int w = op.width();
  if (w > kPairDistributionMaxWidth) {
    throw CapacityError(fmt::format("dense pair distribution limited to width {}; use project_pairs",
                                    kPairDistributionMaxWidth));
  }
  const std::size_t n = op.dimension();
  if (sol.psi.size() != n) throw std::invalid_argument("solution does not match operator");
  std::vector<double> p(n * n);
  for (std::size_t u = 0; u < n; ++u) {
    for (std::size_t v = 0; v < n; ++v) {
      p[u * n + v] = sol.psi[u] * op.entry(static_cast<PatternIndex>(u), static_cast<PatternIndex>(v)) *
                     sol.psi[v] / sol.lambda;
    }
  }
  return PairDistribution(w, std::move(p));
}

std::size_t extract_key(PatternIndex index, int width, std::span<const int> positions) {
  std::size_t key = 0;
  for (int p : positions) key = (key << 1) | ((index >> (width - 1 - p)) & 1u);
  return key;
}

ProjectedPairs project_pairs(const SpectralSolution& sol, const TransferOperator& op,
                             std::span<const int> prev_positions, std::span<const int> cur_positions) {
  const int w = op.width();
  const std::size_t n = op.dimension();
  if (sol.psi.size() != n) throw std::invalid_argument("solution does not match operator");
  for (int p : prev_positions)
    if (p < 0 || p >= w) throw std::out_of_range("projection position outside the stripe");
  for (int p : cur_positions)
    if (p < 0 || p >= w) throw std::out_of_range("projection position outside the stripe");
  if (prev_positions.size() > 16 || cur_positions.size() > 16) {
    throw std::invalid_argument("at most 16 projected cells per stripe");
  }

  ProjectedPairs out;
  out.prev_bits = static_cast<int>(prev_positions.size());
  out.cur_bits = static_cast<int>(cur_positions.size());
  out.p.assign(std::size_t{1} << (out.prev_bits + out.cur_bits), 0.0);

  std::vector<std::uint32_t> prev_key(n), cur_key(n);
  for (std::size_t u = 0; u < n; ++u) {
    prev_key[u] = static_cast<std::uint32_t>(extract_key(static_cast<PatternIndex>(u), w, prev_positions));
    cur_key[u] = static_cast<std::uint32_t>(extract_key(static_cast<PatternIndex>(u), w, cur_positions));
  }

  // With M symmetric, y = M (psi restricted to one key class) gives the
  // partial sums for the opposite side.
  const bool loop_prev = out.prev_bits <= out.cur_bits;
  const std::vector<std::uint32_t>& fixed = loop_prev ? prev_key : cur_key;
  const std::vector<std::uint32_t>& free = loop_prev ? cur_key : prev_key;
  const std::size_t classes = std::size_t{1} << (loop_prev ? out.prev_bits : out.cur_bits);

  std::vector<double> x(n), y(n);
  for (std::size_t k = 0; k < classes; ++k) {
    bool any = false;
    for (std::size_t u = 0; u < n; ++u) {
      x[u] = fixed[u] == k ? sol.psi[u] : 0.0;
      any = any || x[u] != 0.0;
    }
    if (!any) continue;
    op.apply(x, y);
    for (std::size_t u = 0; u < n; ++u) {
      const double contribution = sol.psi[u] * y[u] / sol.lambda;
      const std::size_t other = free[u];
      const std::size_t idx = loop_prev ? ((k << out.cur_bits) | other) : ((other << out.cur_bits) | k);
      out.p[idx] += contribution;
    }
  }
  return out;
}

double capacity_bits_per_node(const SpectralSolution& sol, int width) {
  return std::log2(sol.lambda) / static_cast<double>(width);
}

}  // namespace merw
