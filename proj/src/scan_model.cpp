#include "merw/scan_model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <fmt/format.h>
#include <json.hpp>

#include "merw/errors.hpp"
#include "merw/parallel.hpp"

namespace merw {

int ContextShape::mid_for_width(int width) {
  return static_cast<int>(std::ceil(width / 2.0 + 1.0)) - 1;
}

ContextShape ContextShape::for_width(int width, int before, int after) {
  const int mid = mid_for_width(width);
  if (mid >= width) throw ShapeError(fmt::format("width {} leaves no column for '?'", width));
  const int max_before = mid;
  const int max_after = width - mid;
  if (before < 0 || after < 0 || before > max_before || after > max_after) {
    throw ShapeError(fmt::format(
        "context (before={}, after={}) does not fit width {}: '?' sits at column {}, max before={}, max after={}",
        before, after, width, mid, max_before, max_after));
  }
  return ContextShape{before, after, mid};
}

ScanModel::ScanModel(const ContextShape& shape, const ModelParams& params, std::vector<double> joint)
    : shape_(shape), params_(params), joint_(std::move(joint)) {
  const std::size_t n = shape_.contexts();
  if (joint_.size() != 2 * n) throw std::invalid_argument("joint table has wrong size");
  for (double& v : joint_) {
    if (!(v >= 0.0) || !std::isfinite(v)) {
      // Tiny negative round-off from the projections is clamped.
      if (v < 0.0 && v > -1e-15) {
        v = 0.0;
      } else {
        throw std::invalid_argument("joint probabilities must be finite and nonnegative");
      }
    }
  }
  const double total = pairwise_sum(joint_);
  if (!(total > 0.0)) throw std::invalid_argument("joint distribution has no mass");
  for (double& v : joint_) v /= total;

  table_.resize(n);
  ctx_prob_.resize(n);
  for (std::size_t c = 0; c < n; ++c) {
    const double q = joint_[2 * c] + joint_[2 * c + 1];
    ctx_prob_[c] = q;
    table_[c] = q > 0.0 ? joint_[2 * c + 1] / q : 0.5;
  }
}

ScanModel ScanModel::from_table(const ContextShape& shape, const ModelParams& params, std::span<const double> table,
                                std::span<const double> ctx_prob) {
  const std::size_t n = shape.contexts();
  if (table.size() != n || ctx_prob.size() != n) throw std::invalid_argument("model table has wrong size");
  std::vector<double> joint(2 * n);
  for (std::size_t c = 0; c < n; ++c) {
    if (!(table[c] >= 0.0 && table[c] <= 1.0)) throw std::invalid_argument("model probability outside [0, 1]");
    if (!(ctx_prob[c] >= 0.0)) throw std::invalid_argument("context probability must be nonnegative");
    joint[2 * c + 1] = ctx_prob[c] * table[c];
    joint[2 * c] = ctx_prob[c] - joint[2 * c + 1];
  }
  const double total = pairwise_sum(ctx_prob);
  if (std::abs(total - 1.0) > 1e-10) {
    throw std::invalid_argument(fmt::format("context probabilities sum to {:.17g}, expected 1", total));
  }
  ScanModel model(shape, params, std::move(joint));
  // Keep the stored values exactly as given so serialization round-trips.
  model.table_.assign(table.begin(), table.end());
  model.ctx_prob_.assign(ctx_prob.begin(), ctx_prob.end());
  return model;
}

std::size_t ScanModel::context_key(std::span<const int> before_spins, std::span<const int> after_spins) const {
  if (before_spins.size() != static_cast<std::size_t>(shape_.before) ||
      after_spins.size() != static_cast<std::size_t>(shape_.after)) {
    throw std::invalid_argument("context spin count does not match model shape");
  }
  std::size_t key = 0;
  for (int s : before_spins) key = (key << 1) | (s > 0 ? 1u : 0u);
  for (int s : after_spins) key = (key << 1) | (s > 0 ? 1u : 0u);
  return key;
}

ScanModel derive_model(const SpectralSolution& sol, const TransferOperator& op, int before, int after) {
  const ContextShape shape = ContextShape::for_width(op.width(), before, after);
  std::vector<int> cur_positions;
  for (int p = shape.mid - before; p <= shape.mid; ++p) cur_positions.push_back(p);
  std::vector<int> prev_positions;
  for (int p = shape.mid; p < shape.mid + after; ++p) prev_positions.push_back(p);

  const ProjectedPairs pairs = project_pairs(sol, op, prev_positions, cur_positions);
  std::vector<double> joint(2 * shape.contexts());
  const std::size_t before_keys = std::size_t{1} << before;
  const std::size_t after_keys = std::size_t{1} << after;
  for (std::size_t b = 0; b < before_keys; ++b) {
    for (std::size_t a = 0; a < after_keys; ++a) {
      const std::size_t ctx = (b << after) | a;
      for (std::size_t s = 0; s < 2; ++s) joint[2 * ctx + s] = pairs(a, (b << 1) | s);
    }
  }
  return ScanModel(shape, op.params(), std::move(joint));
}

double binary_entropy_bits(double p) {
  if (p <= 0.0 || p >= 1.0) return 0.0;
  return -p * std::log2(p) - (1.0 - p) * std::log2(1.0 - p);
}

Observables observables(const ScanModel& model, const InteractionSpec& spec) {
  const ContextShape& shape = model.shape();
  if (shape.before < 1 || shape.after < 1) {
    throw ShapeError(fmt::format("observables need before >= 1 and after >= 1, got before={}, after={}",
                                 shape.before, shape.after));
  }
  const LocalEnergies e = spec.energies(model.params());
  const auto joint = model.joint();
  Observables out;
  for (std::size_t c = 0; c < model.contexts(); ++c) {
    const int left = static_cast<int>((c >> shape.after) & 1u);
    const int above = static_cast<int>((c >> (shape.after - 1)) & 1u);
    double u = 0.0;
    for (int s = 1; s >= 0; --s) {
      const double pr = joint[2 * c + static_cast<std::size_t>(s)];
      if (pr == 0.0) continue;
      u += pr * (e.node[s] + e.vbond[above][s] + e.hbond[left][s]);
    }
    out.energy += u;
    out.entropy_bits += model.ctx_prob()[c] * binary_entropy_bits(model.p_plus(c));
    out.magnetization += joint[2 * c + 1] - joint[2 * c];
  }
  return out;
}

ReducedFamily::ReducedFamily(const ScanModel& parent)
    : before_(parent.shape().before), after_(parent.shape().after) {
  const auto joint = parent.joint();
  models_.reserve(static_cast<std::size_t>((before_ + 1) * (after_ + 1)));
  for (int b = 0; b <= before_; ++b) {
    for (int a = 0; a <= after_; ++a) {
      const ContextShape shape{b, a, parent.shape().mid};
      std::vector<double> reduced(2 * shape.contexts(), 0.0);
      for (std::size_t c = 0; c < parent.contexts(); ++c) {
        const std::size_t before_bits = c >> after_;
        const std::size_t after_bits = c & ((std::size_t{1} << after_) - 1);
        const std::size_t kept_before = before_bits & ((std::size_t{1} << b) - 1);
        const std::size_t kept_after = after_bits >> (after_ - a);
        const std::size_t rc = (kept_before << a) | kept_after;
        reduced[2 * rc] += joint[2 * c];
        reduced[2 * rc + 1] += joint[2 * c + 1];
      }
      models_.emplace_back(shape, parent.params(), std::move(reduced));
    }
  }
}

bool ReducedFamily::contains(int before, int after) const {
  return before >= 0 && after >= 0 && before <= before_ && after <= after_;
}

const ScanModel& ReducedFamily::at(int before, int after) const {
  if (!contains(before, after)) {
    throw std::out_of_range(fmt::format("reduced model (before={}, after={}) not in family up to ({}, {})", before,
                                        after, before_, after_));
  }
  return models_[static_cast<std::size_t>(before * (after_ + 1) + after)];
}

ReducedFamily reduced_models(const ScanModel& model) { return ReducedFamily(model); }

int default_block_start(int width, int k) {
  if (k < 1 || k > width) throw std::invalid_argument("block width must be in [1, width]");
  const int mid = ContextShape::mid_for_width(width);
  return std::clamp(mid - k / 2, 0, width - k);
}

std::vector<double> block_distribution(const SpectralSolution& sol, const TransferOperator& op, int k, int start) {
  if (k < 1 || start < 0 || start + k > op.width()) throw std::invalid_argument("block does not fit the stripe");
  std::vector<int> positions;
  for (int p = start; p < start + k; ++p) positions.push_back(p);
  ProjectedPairs pairs = project_pairs(sol, op, positions, positions);
  return std::move(pairs.p);
}

namespace {

std::string number(double v) { return fmt::format("{:.17g}", v); }

std::string array(std::span<const double> values) {
  std::string out = "[";
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ", ";
    out += number(values[i]);
  }
  return out + "]";
}

}  // namespace

std::string to_json(const ScanModel& model) {
  const ModelParams& p = model.params();
  std::string out = "{\n";
  out += fmt::format("  \"width\": {},\n", p.width);
  out += fmt::format("  \"cyclic\": {},\n", p.cyclic ? "true" : "false");
  out += fmt::format("  \"beta\": {},\n", number(p.beta));
  out += fmt::format("  \"mu\": {},\n", number(p.mu));
  out += fmt::format("  \"jh\": {},\n", number(p.jh));
  out += fmt::format("  \"jv\": {},\n", number(p.jv));
  out += fmt::format("  \"before\": {},\n", model.shape().before);
  out += fmt::format("  \"after\": {},\n", model.shape().after);
  out += fmt::format("  \"table\": {},\n", array(model.table()));
  out += fmt::format("  \"ctx_prob\": {},\n", array(model.ctx_prob()));
  out += fmt::format("  \"bit_order\": \"{}\"\n", kContextBitOrder);
  out += "}\n";
  return out;
}

ScanModel scan_model_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("scan model JSON: ") + e.what());
  }
  try {
    if (j.at("bit_order").get<std::string>() != kContextBitOrder) {
      throw std::invalid_argument("scan model JSON: unsupported bit_order");
    }
    ModelParams params;
    params.width = j.at("width").get<int>();
    params.cyclic = j.at("cyclic").get<bool>();
    params.beta = j.at("beta").get<double>();
    params.mu = j.at("mu").get<double>();
    params.jh = j.at("jh").get<double>();
    params.jv = j.at("jv").get<double>();
    params.validate();
    const ContextShape shape =
        ContextShape::for_width(params.width, j.at("before").get<int>(), j.at("after").get<int>());
    const auto table = j.at("table").get<std::vector<double>>();
    const auto ctx_prob = j.at("ctx_prob").get<std::vector<double>>();
    return ScanModel::from_table(shape, params, table, ctx_prob);
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("scan model JSON: ") + e.what());
  }
}

std::string model_hash(const ScanModel& model) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : to_json(model)) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return fmt::format("{:016x}", h);
}

}  // namespace merw
