#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include "merw/pattern_space.hpp"
#include "merw/spectral.hpp"

namespace merw {

enum class Representation { dense, implicit };

struct OperatorLimits {
  int dense_max_width = 14;
  int implicit_max_width = 26;
};

// Boltzmann transition matrix M_uv = exp(-beta (E_u/2 + E_uv + E_v/2)) over
// width-w stripe patterns.
//
// The implicit form stores M = D K D with D = diag(exp(-beta E_u / 2)) and
// K = k (x) k (x) ... (x) k, k_ab = exp(-beta vbond[a][b]); a matvec costs
// O(w 2^w) and no 2^w x 2^w array is ever allocated. The dense form fills the
// full matrix directly from the pattern energies and serves as the reference.
class TransferOperator {
 public:
  static TransferOperator build(const ModelParams& params, const InteractionSpec& spec,
                                Representation representation, const OperatorLimits& limits = {});

  const ModelParams& params() const { return params_; }
  const InteractionSpec& spec() const { return spec_; }
  Representation representation() const { return representation_; }
  int width() const { return params_.width; }
  std::size_t dimension() const { return half_.size(); }

  double entry(PatternIndex u, PatternIndex v) const;

  // y = M x. x and y must not alias.
  void apply(std::span<const double> x, std::span<double> y) const;

  bool symmetric() const { return spec_.symmetric(); }

  // exp(-beta E_u / 2); zero for forbidden patterns.
  std::span<const double> half_weights() const { return half_; }
  const std::array<std::array<double, 2>, 2>& kernel() const { return kernel_; }

  // Reachability over the nonzero structure restricted to allowed patterns.
  // Checked exhaustively up to width 14; wider operators with zero kernel
  // entries are assumed irreducible.
  bool irreducible() const;

 private:
  TransferOperator() = default;

  bool kernel_positive(PatternIndex u, PatternIndex v) const;

  ModelParams params_;
  InteractionSpec spec_;
  Representation representation_ = Representation::implicit;
  std::vector<double> half_;
  std::array<std::array<double, 2>, 2> kernel_{};
  std::vector<double> dense_;
};

// Dominant (Perron) eigenpair of a symmetric transfer operator.
// Throws std::invalid_argument for non-symmetric operators,
// ReducibleOperatorError for disconnected pattern graphs and
// ConvergenceError when the iteration budget runs out.
SpectralSolution dominant_eigenpair(const TransferOperator& op, const SolverOptions& options = {});

// Pr(u) = psi_u^2.
std::vector<double> pattern_prob(const SpectralSolution& sol);

// Dense Pr(u, v) = psi_u M_uv psi_v / lambda, for u the earlier stripe.
class PairDistribution {
 public:
  PairDistribution(int width, std::vector<double> p);

  int width() const { return width_; }
  std::size_t dimension() const { return std::size_t{1} << width_; }
  double operator()(PatternIndex u, PatternIndex v) const { return p_[u * dimension() + v]; }
  std::span<const double> values() const { return p_; }

 private:
  int width_;
  std::vector<double> p_;
};

inline constexpr int kPairDistributionMaxWidth = 12;

// Throws CapacityError above kPairDistributionMaxWidth; wider operators are
// only ever used through project_pairs.
PairDistribution pair_prob(const SpectralSolution& sol, const TransferOperator& op);

// Marginal of Pr(u, v) on selected cells: the key of u is built from the bits
// at prev_positions, the key of v from cur_positions (both MSB-first in list
// order). Result is row-major [prev_key][cur_key]. Uses 2^min(|prev|,|cur|)
// operator applications; Pr(u, v) is never materialized.
struct ProjectedPairs {
  int prev_bits = 0;
  int cur_bits = 0;
  std::vector<double> p;

  double operator()(std::size_t prev_key, std::size_t cur_key) const {
    return p[(prev_key << cur_bits) | cur_key];
  }
};

ProjectedPairs project_pairs(const SpectralSolution& sol, const TransferOperator& op,
                             std::span<const int> prev_positions, std::span<const int> cur_positions);

// Bits at the given positions of `index`, MSB-first.
std::size_t extract_key(PatternIndex index, int width, std::span<const int> positions);

// log2(lambda) / width: entropy (or free-entropy) per node in bits.
double capacity_bits_per_node(const SpectralSolution& sol, int width);

}  // namespace merw
