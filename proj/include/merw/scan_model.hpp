#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "merw/pattern_space.hpp"
#include "merw/spectral.hpp"
#include "merw/transfer_operator.hpp"

namespace merw {

// Causal scanning context around the '?' cell at column `mid` of a stripe:
// `before` cells to its left in the current row (mid-before .. mid-1) and
// `after` cells of the previous row starting directly above it
// (mid .. mid+after-1).
struct ContextShape {
  int before = 3;
  int after = 3;
  int mid = 0;

  static int mid_for_width(int width);
  // Throws ShapeError naming the largest feasible (before, after) if the
  // context does not fit inside the stripe.
  static ContextShape for_width(int width, int before, int after);

  std::size_t contexts() const { return std::size_t{1} << (before + after); }
  friend bool operator==(const ContextShape&, const ContextShape&) = default;
};

inline constexpr const char* kContextBitOrder = "before-msb-first,then-after-msb-first";

// Conditional model Pr(? = +1 | context). Context key is
// (before bits, left to right) * 2^after + (after bits, left to right), bit = (spin + 1) / 2.
// Holds the joint Pr(context, ?) so reductions and observables never need the
// operator again. Immutable after construction.
class ScanModel {
 public:
  // joint[2 * ctx + s], s = 1 for spin +1. Renormalized to total mass 1.
  ScanModel(const ContextShape& shape, const ModelParams& params, std::vector<double> joint);

  static ScanModel from_table(const ContextShape& shape, const ModelParams& params,
                              std::span<const double> table, std::span<const double> ctx_prob);

  const ContextShape& shape() const { return shape_; }
  const ModelParams& params() const { return params_; }
  std::size_t contexts() const { return shape_.contexts(); }

  std::span<const double> table() const { return table_; }
  std::span<const double> ctx_prob() const { return ctx_prob_; }
  std::span<const double> joint() const { return joint_; }
  double p_plus(std::size_t ctx) const { return table_[ctx]; }
  // Context with zero probability; its table entry is 0.5 and carries no weight.
  bool unreachable(std::size_t ctx) const { return ctx_prob_[ctx] == 0.0; }

  std::size_t context_key(std::span<const int> before_spins, std::span<const int> after_spins) const;

 private:
  ContextShape shape_;
  ModelParams params_;
  std::vector<double> joint_;
  std::vector<double> table_;
  std::vector<double> ctx_prob_;
};

ScanModel derive_model(const SpectralSolution& sol, const TransferOperator& op, int before, int after);

struct Observables {
  double energy = 0.0;         // U per node
  double entropy_bits = 0.0;   // H per node
  double magnetization = 0.0;  // mean spin per node
};

// Requires before >= 1 and after >= 1 (the energy needs the left and upper
// neighbours). Throws ShapeError otherwise.
Observables observables(const ScanModel& model, const InteractionSpec& spec = InteractionSpec::ising());

double binary_entropy_bits(double p);

// Every (b', a') <= (before, after) obtained by marginalizing the parent's
// joint over the dropped outer cells: leftmost before-cells and rightmost
// after-cells go first.
class ReducedFamily {
 public:
  explicit ReducedFamily(const ScanModel& parent);

  int before() const { return before_; }
  int after() const { return after_; }
  bool contains(int before, int after) const;
  // Throws std::out_of_range for shapes outside the family.
  const ScanModel& at(int before, int after) const;

 private:
  int before_;
  int after_;
  std::vector<ScanModel> models_;  // index b * (after + 1) + a
};

ReducedFamily reduced_models(const ScanModel& model);

// Pr of 2 x k blocks of adjacent stripes at columns start..start+k-1; key is
// (upper row bits << k) | lower row bits, MSB-first.
std::vector<double> block_distribution(const SpectralSolution& sol, const TransferOperator& op, int k, int start);
// Block centred on the '?' column.
int default_block_start(int width, int k);

// Stable JSON with 17 significant digits.
std::string to_json(const ScanModel& model);
ScanModel scan_model_from_json(const std::string& text);
// FNV-1a 64 of to_json(model), as 16 hex digits.
std::string model_hash(const ScanModel& model);

}  // namespace merw
