#include "merw/path_ensemble.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <istream>
#include <sstream>
#include <stdexcept>

#include <fmt/format.h>
#include <json.hpp>

#include "merw/errors.hpp"
#include "merw/parallel.hpp"

namespace merw {

// ---------------------------------------------------------------------------
// Projections and homogeneous chains
// ---------------------------------------------------------------------------

Projection Projection::identity(std::size_t dimension) {
  Projection p;
  p.diag_.assign(dimension, 1.0);
  return p;
}

Projection Projection::from_diagonal(std::vector<double> diagonal) {
  for (double v : diagonal)
    if (v != 0.0 && v != 1.0) throw std::invalid_argument("projection diagonal entries must be 0 or 1");
  Projection p;
  p.diag_ = std::move(diagonal);
  return p;
}

Projection Projection::from_matrix(const std::vector<std::vector<double>>& matrix) {
  const std::size_t n = matrix.size();
  std::vector<double> diag(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (matrix[i].size() != n) throw std::invalid_argument("projection matrix must be square");
    for (std::size_t j = 0; j < n; ++j) {
      if (i != j && matrix[i][j] != 0.0) throw std::invalid_argument("projection matrix must be diagonal");
    }
    diag[i] = matrix[i][i];
  }
  return from_diagonal(std::move(diag));
}

Projection Projection::fix_pattern(int width, PatternIndex u) {
  const SpinPattern checked(u, width);
  Projection p;
  p.diag_.assign(pattern_count(width), 0.0);
  p.diag_[checked.index()] = 1.0;
  return p;
}

Projection Projection::fix_cells(int width, std::span<const std::pair<int, int>> position_bits) {
  for (const auto& [pos, bit] : position_bits) {
    if (pos < 0 || pos >= width) throw std::out_of_range("projection cell outside the stripe");
    if (bit != 0 && bit != 1) throw std::invalid_argument("cell value must be 0 or 1");
  }
  Projection p;
  const std::size_t n = pattern_count(width);
  p.diag_.assign(n, 0.0);
  for (std::size_t u = 0; u < n; ++u) {
    bool ok = true;
    for (const auto& [pos, bit] : position_bits) {
      ok = ok && static_cast<int>((u >> (width - 1 - pos)) & 1u) == bit;
    }
    p.diag_[u] = ok ? 1.0 : 0.0;
  }
  return p;
}

double projected_prob(const SpectralSolution& sol, const TransferOperator& op,
                      std::span<const Projection> projections) {
  const std::size_t n = op.dimension();
  if (projections.empty()) throw std::invalid_argument("need at least one projection");
  if (sol.psi.size() != n) throw std::invalid_argument("solution does not match operator");
  for (const Projection& p : projections)
    if (p.dimension() != n) throw std::invalid_argument("projection dimension does not match operator");

  std::vector<double> v(n), y(n);
  const auto last = projections.back().diagonal();
  for (std::size_t i = 0; i < n; ++i) v[i] = last[i] * sol.psi[i];
  for (std::size_t k = projections.size() - 1; k-- > 0;) {
    op.apply(v, y);
    const auto d = projections[k].diagonal();
    for (std::size_t i = 0; i < n; ++i) v[i] = d[i] * y[i] / sol.lambda;
  }
  return pairwise_dot(sol.psi, v);
}

double sequence_prob(const SpectralSolution& sol, const TransferOperator& op, std::span<const PatternIndex> patterns) {
  if (patterns.empty()) throw std::invalid_argument("need at least one pattern");
  const std::size_t n = op.dimension();
  if (sol.psi.size() != n) throw std::invalid_argument("solution does not match operator");
  for (PatternIndex u : patterns)
    if (u >= n) throw std::out_of_range("pattern index out of range");
  double p = sol.psi[patterns.front()];
  for (std::size_t i = 1; i < patterns.size(); ++i) p *= op.entry(patterns[i - 1], patterns[i]) / sol.lambda;
  return p * sol.psi[patterns.back()];
}

ScanModel vertical_context_model(const ModelParams& params, const InteractionSpec& spec, int before, int after,
                                 const SolverOptions& options) {
  params.validate();
  if (before < 0 || after < 0) throw ShapeError("context sizes must be nonnegative");
  if (params.width < 2) throw ShapeError("vertical context needs stripes of width >= 2");
  if (before + after > 12) throw ShapeError("vertical context limited to before + after <= 12");

  ModelParams rotated = params;
  std::swap(rotated.jh, rotated.jv);
  const Representation rep = params.width <= 12 ? Representation::dense : Representation::implicit;
  const TransferOperator op = TransferOperator::build(rotated, spec, rep);
  const SpectralSolution sol = dominant_eigenpair(op, options);

  const int w = params.width;
  const int row = ContextShape::mid_for_width(w) < w ? ContextShape::mid_for_width(w) : w - 1;
  const int upper = row - 1;
  const std::size_t stripes = static_cast<std::size_t>(before + std::max(after, 1));
  const ContextShape shape{before, after, ContextShape::mid_for_width(w)};

  std::vector<double> joint(2 * shape.contexts());
  std::vector<Projection> chain;
  chain.reserve(stripes);
  for (std::size_t ctx = 0; ctx < shape.contexts(); ++ctx) {
    const std::size_t before_bits = ctx >> after;
    const std::size_t after_bits = ctx & ((std::size_t{1} << after) - 1);
    for (int s = 0; s < 2; ++s) {
      chain.clear();
      for (int i = 0; i < before; ++i) {
        const int bit = static_cast<int>((before_bits >> (before - 1 - i)) & 1u);
        const std::pair<int, int> cells[] = {{row, bit}};
        chain.push_back(Projection::fix_cells(w, cells));
      }
      for (int j = 0; j < std::max(after, 1); ++j) {
        std::vector<std::pair<int, int>> cells;
        if (j == 0) cells.emplace_back(row, s);
        if (j < after) cells.emplace_back(upper, static_cast<int>((after_bits >> (after - 1 - j)) & 1u));
        chain.push_back(Projection::fix_cells(w, cells));
      }
      joint[2 * ctx + static_cast<std::size_t>(s)] = projected_prob(sol, op, chain);
    }
  }
  return ScanModel(shape, params, std::move(joint));
}

// ---------------------------------------------------------------------------
// Gates
// ---------------------------------------------------------------------------

Gate::Gate(GateKind kind, std::vector<int> inputs, std::vector<int> outputs, std::vector<double> matrix)
    : kind_(kind), inputs_(std::move(inputs)), outputs_(std::move(outputs)), matrix_(std::move(matrix)) {
  if (inputs_.size() > 16 || outputs_.size() > 16) throw std::invalid_argument("gate arity too large");
  const std::size_t expected = std::size_t{1} << (inputs_.size() + outputs_.size());
  if (matrix_.size() != expected) {
    throw std::invalid_argument(fmt::format("gate matrix needs {} entries, got {}", expected, matrix_.size()));
  }
  for (double v : matrix_)
    if (!(v >= 0.0) || !std::isfinite(v)) throw std::invalid_argument("gate entries must be finite and nonnegative");
  auto distinct = [](std::vector<int> v) {
    std::sort(v.begin(), v.end());
    return std::adjacent_find(v.begin(), v.end()) == v.end();
  };
  if (!distinct(inputs_) || !distinct(outputs_)) throw std::invalid_argument("gate cells must be distinct");
}

Gate Gate::mix(int input, int output) { return Gate(GateKind::mix, {input}, {output}, {1, 1, 1, 1}); }

Gate Gate::negate(int input, int output) { return Gate(GateKind::negate, {input}, {output}, {0, 1, 1, 0}); }

Gate Gate::split(int input, int out_a, int out_b) {
  return Gate(GateKind::split, {input}, {out_a, out_b}, {1, 0, 0, 0, 0, 0, 0, 1});
}

Gate Gate::split_collapse(int in_a, int in_b, int output) {
  return Gate(GateKind::split, {in_a, in_b}, {output}, {1, 0, 0, 0, 0, 0, 0, 1});
}

Gate Gate::or3(std::array<int, 3> inputs, int output, unsigned negated) {
  if (negated > 7) throw std::invalid_argument("OR3 negation mask has 3 bits");
  // Bit i of `negated` refers to inputs[i], which is key bit 2 - i.
  unsigned flip = 0;
  for (int i = 0; i < 3; ++i)
    if (negated & (1u << i)) flip |= 1u << (2 - i);
  std::vector<double> m(16, 0.0);
  for (unsigned key = 0; key < 8; ++key) {
    const bool any = (key ^ flip) != 0;
    m[2 * key + (any ? 1 : 0)] = 1.0;
  }
  return Gate(GateKind::or3, {inputs[0], inputs[1], inputs[2]}, {output}, std::move(m));
}

Gate Gate::wire(int input, int output, std::optional<double> coupling) {
  if (!coupling) return Gate(GateKind::wire, {input}, {output}, {1, 0, 0, 1});
  const double a = std::exp(*coupling);
  const double b = std::exp(-*coupling);
  return Gate(GateKind::wire, {input}, {output}, {a, b, b, a});
}

Gate Gate::controlled(int control_in, int control_out, const Gate& target) {
  const std::size_t t_in = target.inputs_.size();
  const std::size_t t_out = target.outputs_.size();
  if (t_in != t_out) throw std::invalid_argument("controlled gate target must preserve arity");
  const std::size_t dim = std::size_t{1} << t_in;
  std::vector<double> m(4 * dim * dim, 0.0);
  const std::size_t cols = 2 * dim;
  for (std::size_t x = 0; x < dim; ++x) m[x * cols + x] = 1.0;
  for (std::size_t x = 0; x < dim; ++x)
    for (std::size_t y = 0; y < dim; ++y) m[(dim + x) * cols + dim + y] = target.weight(x, y);
  std::vector<int> in{control_in};
  in.insert(in.end(), target.inputs_.begin(), target.inputs_.end());
  std::vector<int> out{control_out};
  out.insert(out.end(), target.outputs_.begin(), target.outputs_.end());
  return Gate(GateKind::controlled, std::move(in), std::move(out), std::move(m));
}

Gate Gate::custom(std::vector<int> inputs, std::vector<int> outputs, std::vector<double> matrix) {
  return Gate(GateKind::custom, std::move(inputs), std::move(outputs), std::move(matrix));
}

// ---------------------------------------------------------------------------
// Layer transitions
// ---------------------------------------------------------------------------

namespace {

void check_width(int w) {
  if (w < 0 || w > kMaxLayerWidth) {
    throw CapacityError(fmt::format("layer width {} outside [0, {}]", w, kMaxLayerWidth));
  }
}

std::size_t bits_at(std::size_t x, int width, std::span<const int> positions) {
  std::size_t key = 0;
  for (int p : positions) key = (key << 1) | ((x >> (width - 1 - p)) & 1u);
  return key;
}

}  // namespace

LayerTransition LayerTransition::from_gates(int in_width, int out_width, std::vector<Gate> gates) {
  check_width(in_width);
  check_width(out_width);
  std::vector<int> writers(static_cast<std::size_t>(out_width), 0);
  for (const Gate& g : gates) {
    for (int p : g.inputs())
      if (p < 0 || p >= in_width) throw std::out_of_range(fmt::format("gate input {} outside layer of width {}", p, in_width));
    for (int p : g.outputs()) {
      if (p < 0 || p >= out_width) throw std::out_of_range(fmt::format("gate output {} outside layer of width {}", p, out_width));
      ++writers[static_cast<std::size_t>(p)];
    }
  }
  for (int p = 0; p < out_width; ++p) {
    if (writers[static_cast<std::size_t>(p)] != 1) {
      throw std::invalid_argument(fmt::format("output cell {} written by {} gates, expected exactly 1", p,
                                              writers[static_cast<std::size_t>(p)]));
    }
  }

  LayerTransition t;
  t.in_width_ = in_width;
  t.out_width_ = out_width;
  t.rows_.reserve(gates.size());
  for (const Gate& g : gates) {
    const std::size_t in_keys = std::size_t{1} << g.inputs().size();
    const std::size_t out_keys = std::size_t{1} << g.outputs().size();
    std::vector<std::vector<Entry>> rows(in_keys);
    for (std::size_t ik = 0; ik < in_keys; ++ik) {
      for (std::size_t ok = 0; ok < out_keys; ++ok) {
        const double w = g.weight(ik, ok);
        if (w == 0.0) continue;
        std::uint32_t placed = 0;
        const std::size_t arity = g.outputs().size();
        for (std::size_t i = 0; i < arity; ++i) {
          if ((ok >> (arity - 1 - i)) & 1u) placed |= std::uint32_t{1} << (out_width - 1 - g.outputs()[i]);
        }
        rows[ik].push_back(Entry{placed, w});
      }
    }
    t.rows_.push_back(std::move(rows));
  }
  t.gates_ = std::move(gates);
  return t;
}

LayerTransition LayerTransition::from_matrix(int in_width, int out_width, std::vector<double> matrix) {
  check_width(in_width);
  check_width(out_width);
  const std::size_t expected = (std::size_t{1} << in_width) * (std::size_t{1} << out_width);
  if (matrix.size() != expected) throw std::invalid_argument("transition matrix has wrong size");
  for (double v : matrix)
    if (!(v >= 0.0) || !std::isfinite(v)) throw std::invalid_argument("transition entries must be finite and nonnegative");
  LayerTransition t;
  t.in_width_ = in_width;
  t.out_width_ = out_width;
  t.dense_ = std::move(matrix);
  return t;
}

template <typename Fn>
void LayerTransition::for_each_in_row(std::size_t x, Fn&& fn) const {
  const std::size_t g_count = gates_.size();
  std::vector<const std::vector<Entry>*> rows(g_count);
  for (std::size_t g = 0; g < g_count; ++g) {
    rows[g] = &rows_[g][bits_at(x, in_width_, gates_[g].inputs())];
    if (rows[g]->empty()) return;
  }
  auto rec = [&](auto&& self, std::size_t g, std::uint32_t bits, double w) -> void {
    if (g == g_count) {
      fn(static_cast<std::size_t>(bits), w);
      return;
    }
    for (const Entry& e : *rows[g]) self(self, g + 1, bits | e.bits, w * e.weight);
  };
  rec(rec, 0, 0u, 1.0);
}

void LayerTransition::forward(std::span<const double> a, std::span<double> out) const {
  const std::size_t nx = std::size_t{1} << in_width_;
  const std::size_t ny = std::size_t{1} << out_width_;
  if (a.size() != nx || out.size() != ny) throw std::invalid_argument("forward dimension mismatch");
  std::fill(out.begin(), out.end(), 0.0);
  if (!dense_.empty()) {
    for (std::size_t x = 0; x < nx; ++x) {
      if (a[x] == 0.0) continue;
      const double* row = dense_.data() + x * ny;
      for (std::size_t y = 0; y < ny; ++y) out[y] += a[x] * row[y];
    }
    return;
  }
  for (std::size_t x = 0; x < nx; ++x) {
    if (a[x] == 0.0) continue;
    const double ax = a[x];
    for_each_in_row(x, [&](std::size_t y, double w) { out[y] += ax * w; });
  }
}

void LayerTransition::backward(std::span<const double> b, std::span<double> out) const {
  const std::size_t nx = std::size_t{1} << in_width_;
  const std::size_t ny = std::size_t{1} << out_width_;
  if (b.size() != ny || out.size() != nx) throw std::invalid_argument("backward dimension mismatch");
  if (!dense_.empty()) {
    for (std::size_t x = 0; x < nx; ++x) {
      const double* row = dense_.data() + x * ny;
      double s = 0.0;
      for (std::size_t y = 0; y < ny; ++y) s += row[y] * b[y];
      out[x] = s;
    }
    return;
  }
  for (std::size_t x = 0; x < nx; ++x) {
    double s = 0.0;
    for_each_in_row(x, [&](std::size_t y, double w) { s += w * b[y]; });
    out[x] = s;
  }
}

std::vector<double> LayerTransition::materialize() const {
  if (!dense_.empty()) return dense_;
  const std::size_t nx = std::size_t{1} << in_width_;
  const std::size_t ny = std::size_t{1} << out_width_;
  std::vector<double> m(nx * ny, 0.0);
  for (std::size_t x = 0; x < nx; ++x) for_each_in_row(x, [&](std::size_t y, double w) { m[x * ny + y] = w; });
  return m;
}

// ---------------------------------------------------------------------------
// Layered ensembles
// ---------------------------------------------------------------------------

namespace {

std::vector<double> normalized_amplitude(std::vector<double> psi, const char* name) {
  for (double v : psi)
    if (!(v >= 0.0) || !std::isfinite(v)) throw std::invalid_argument(fmt::format("{} must be nonnegative", name));
  const double n = norm2(psi);
  if (!(n > 0.0)) throw std::invalid_argument(fmt::format("{} must be nonzero", name));
  for (double& v : psi) v /= n;
  return psi;
}

// Scales v so its maximum is 1; returns log of the factor removed.
double rescale(std::vector<double>& v) {
  const double m = *std::max_element(v.begin(), v.end());
  if (!(m > 0.0)) return -INFINITY;
  for (double& x : v) x /= m;
  return std::log(m);
}

}  // namespace

LayeredEnsemble::LayeredEnsemble(std::vector<int> widths, std::vector<LayerTransition> transitions,
                                 std::vector<double> psi_left, std::vector<double> psi_right)
    : widths_(std::move(widths)), transitions_(std::move(transitions)) {
  if (widths_.empty()) throw std::invalid_argument("ensemble needs at least one layer");
  if (transitions_.size() + 1 != widths_.size()) throw std::invalid_argument("need one transition between each pair of layers");
  for (int w : widths_) check_width(w);
  for (std::size_t k = 0; k < transitions_.size(); ++k) {
    if (transitions_[k].in_width() != widths_[k] || transitions_[k].out_width() != widths_[k + 1]) {
      throw std::invalid_argument(fmt::format("transition {} maps width {} -> {}, layers are {} -> {}", k,
                                              transitions_[k].in_width(), transitions_[k].out_width(), widths_[k],
                                              widths_[k + 1]));
    }
  }
  if (psi_left.size() != pattern_count(widths_.front())) throw std::invalid_argument("psiL size does not match first layer");
  if (psi_right.size() != pattern_count(widths_.back())) throw std::invalid_argument("psiR size does not match last layer");
  psi_left_ = normalized_amplitude(std::move(psi_left), "psiL");
  psi_right_ = normalized_amplitude(std::move(psi_right), "psiR");
}

EnsembleMarginals ensemble_distribution(const LayeredEnsemble& e) {
  const std::size_t layers = e.layers();
  std::vector<std::vector<double>> alpha(layers), beta(layers);
  std::vector<double> log_alpha(layers, 0.0), log_beta(layers, 0.0);

  alpha[0].assign(e.psi_left().begin(), e.psi_left().end());
  for (std::size_t k = 0; k + 1 < layers; ++k) {
    alpha[k + 1].assign(pattern_count(e.widths()[k + 1]), 0.0);
    e.transitions()[k].forward(alpha[k], alpha[k + 1]);
    const double s = rescale(alpha[k + 1]);
    if (std::isinf(s)) throw EmptyEnsembleError(fmt::format("empty ensemble: no path survives layer {}", k + 1));
    log_alpha[k + 1] = log_alpha[k] + s;
  }
  beta[layers - 1].assign(e.psi_right().begin(), e.psi_right().end());
  for (std::size_t k = layers - 1; k-- > 0;) {
    beta[k].assign(pattern_count(e.widths()[k]), 0.0);
    e.transitions()[k].backward(beta[k + 1], beta[k]);
    const double s = rescale(beta[k]);
    if (std::isinf(s)) throw EmptyEnsembleError(fmt::format("empty ensemble: no path reaches layer {} from the right", k));
    log_beta[k] = log_beta[k + 1] + s;
  }

  EnsembleMarginals out;
  out.layers.resize(layers);
  for (std::size_t k = 0; k < layers; ++k) {
    std::vector<double>& m = out.layers[k];
    m.resize(alpha[k].size());
    for (std::size_t i = 0; i < m.size(); ++i) m[i] = alpha[k][i] * beta[k][i];
    const double z = pairwise_sum(m);
    if (!(z > 0.0)) throw EmptyEnsembleError("empty ensemble: total path weight is zero");
    for (double& v : m) v /= z;
    if (k == 0) out.log_partition = std::log(z) + log_alpha[k] + log_beta[k];
  }
  return out;
}

std::vector<double> cell_marginal(std::span<const double> distribution, int width, std::span<const int> positions) {
  if (distribution.size() != pattern_count(width)) throw std::invalid_argument("distribution size does not match width");
  for (int p : positions)
    if (p < 0 || p >= width) throw std::out_of_range("cell outside layer");
  std::vector<double> out(std::size_t{1} << positions.size(), 0.0);
  for (std::size_t x = 0; x < distribution.size(); ++x) out[bits_at(x, width, positions)] += distribution[x];
  return out;
}

namespace {

using nlohmann::json;

Gate gate_from_json(const json& g) {
  const std::string kind = g.at("kind").get<std::string>();
  const auto inputs = g.value("inputs", std::vector<int>{});
  const auto outputs = g.value("outputs", std::vector<int>{});
  auto need = [&](std::size_t in, std::size_t out) {
    if (inputs.size() != in || outputs.size() != out) {
      throw std::invalid_argument(fmt::format("gate {} needs {} inputs and {} outputs", kind, in, out));
    }
  };
  if (kind == "X" || kind == "MIX") {
    need(1, 1);
    return Gate::mix(inputs[0], outputs[0]);
  }
  if (kind == "NOT") {
    need(1, 1);
    return Gate::negate(inputs[0], outputs[0]);
  }
  if (kind == "SPLIT") {
    const std::string orientation = g.value("orientation", inputs.size() == 2 ? "collapse" : "fanout");
    if (orientation == "fanout") {
      need(1, 2);
      return Gate::split(inputs[0], outputs[0], outputs[1]);
    }
    if (orientation == "collapse") {
      need(2, 1);
      return Gate::split_collapse(inputs[0], inputs[1], outputs[0]);
    }
    throw std::invalid_argument("SPLIT orientation must be fanout or collapse");
  }
  if (kind == "OR3") {
    need(3, 1);
    unsigned mask = 0;
    if (g.contains("negated")) {
      const auto neg = g.at("negated").get<std::vector<bool>>();
      if (neg.size() != 3) throw std::invalid_argument("OR3 negated needs three flags");
      for (int i = 0; i < 3; ++i)
        if (neg[static_cast<std::size_t>(i)]) mask |= 1u << i;
    }
    return Gate::or3({inputs[0], inputs[1], inputs[2]}, outputs[0], mask);
  }
  if (kind == "WIRE") {
    need(1, 1);
    std::optional<double> coupling;
    if (g.contains("coupling")) coupling = g.at("coupling").get<double>();
    return Gate::wire(inputs[0], outputs[0], coupling);
  }
  if (kind == "CONTROLLED") {
    need(1, 1);
    return Gate::controlled(inputs[0], outputs[0], gate_from_json(g.at("target")));
  }
  if (kind == "CUSTOM") {
    const auto rows = g.at("matrix").get<std::vector<std::vector<double>>>();
    std::vector<double> flat;
    for (const auto& r : rows) flat.insert(flat.end(), r.begin(), r.end());
    return Gate::custom(inputs, outputs, std::move(flat));
  }
  throw std::invalid_argument("unknown gate kind: " + kind);
}

int width_of_length(std::size_t n, const char* what) {
  if (n == 0 || !std::has_single_bit(n)) {
    throw std::invalid_argument(fmt::format("{} length {} is not a power of two", what, n));
  }
  return std::countr_zero(n);
}

}  // namespace

LayeredEnsemble ensemble_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("circuit JSON: ") + e.what());
  }
  try {
    auto psi_left = j.at("psiL").get<std::vector<double>>();
    auto psi_right = j.at("psiR").get<std::vector<double>>();
    std::vector<int> widths{width_of_length(psi_left.size(), "psiL")};
    std::vector<LayerTransition> transitions;
    for (const json& layer : j.at("layers")) {
      const int in_width = widths.back();
      if (layer.contains("matrix")) {
        const auto rows = layer.at("matrix").get<std::vector<std::vector<double>>>();
        if (rows.size() != pattern_count(in_width)) throw std::invalid_argument("layer matrix row count mismatch");
        const int out_width = width_of_length(rows.empty() ? 0 : rows.front().size(), "layer matrix row");
        std::vector<double> flat;
        for (const auto& r : rows) flat.insert(flat.end(), r.begin(), r.end());
        transitions.push_back(LayerTransition::from_matrix(in_width, out_width, std::move(flat)));
        widths.push_back(out_width);
        continue;
      }
      std::vector<Gate> gates;
      int max_out = -1;
      for (const json& g : layer.at("gates")) {
        gates.push_back(gate_from_json(g));
        for (int p : gates.back().outputs()) max_out = std::max(max_out, p);
      }
      const int out_width = layer.value("width", max_out + 1);
      transitions.push_back(LayerTransition::from_gates(in_width, out_width, std::move(gates)));
      widths.push_back(out_width);
    }
    return LayeredEnsemble(std::move(widths), std::move(transitions), std::move(psi_left), std::move(psi_right));
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("circuit JSON: ") + e.what());
  }
}

// ---------------------------------------------------------------------------
// Mermin
// ---------------------------------------------------------------------------

LayeredEnsemble mermin_ensemble(int first, int second) {
  if (first == second || first < 0 || second < 0 || first > 2 || second > 2) {
    throw std::invalid_argument("measure two distinct cells of A, B, C");
  }
  const int other = 3 - first - second;
  std::vector<double> psi(8, 1.0 / std::sqrt(6.0));
  psi[0] = 0.0;
  psi[7] = 0.0;
  std::vector<Gate> gates{Gate::wire(first, first), Gate::wire(second, second), Gate::mix(other, other)};
  std::vector<LayerTransition> t;
  t.push_back(LayerTransition::from_gates(3, 3, std::move(gates)));
  return LayeredEnsemble({3, 3}, std::move(t), psi, psi);
}

MerminResult mermin() {
  auto equal_prob = [](int a, int b) {
    const EnsembleMarginals m = ensemble_distribution(mermin_ensemble(a, b));
    const int cells[] = {a, b};
    const std::vector<double> pair = cell_marginal(m.layers[0], 3, cells);
    return pair[0] + pair[3];
  };
  MerminResult r;
  r.ab = equal_prob(0, 1);
  r.ac = equal_prob(0, 2);
  r.bc = equal_prob(1, 2);
  r.sum = r.ab + r.ac + r.bc;
  r.violated = r.sum < 1.0;
  return r;
}

// ---------------------------------------------------------------------------
// 3-SAT
// ---------------------------------------------------------------------------

Cnf parse_dimacs(std::istream& in) {
  Cnf cnf;
  int declared_clauses = -1;
  std::vector<int> current;
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::string first;
    if (!(ls >> first)) continue;
    if (first == "c") continue;
    if (first == "%") break;
    if (first == "p") {
      std::string format;
      if (!(ls >> format >> cnf.variables >> declared_clauses) || format != "cnf" || cnf.variables < 1 ||
          declared_clauses < 0) {
        throw std::invalid_argument("malformed DIMACS problem line: " + line);
      }
      continue;
    }
    if (declared_clauses < 0) throw std::invalid_argument("DIMACS clause before problem line");
    std::istringstream tokens(line);
    std::string tok;
    while (tokens >> tok) {
      int lit = 0;
      try {
        std::size_t used = 0;
        lit = std::stoi(tok, &used);
        if (used != tok.size()) throw std::invalid_argument(tok);
      } catch (const std::exception&) {
        throw std::invalid_argument("bad DIMACS literal: " + tok);
      }
      if (lit == 0) {
        if (current.size() != 3) {
          throw std::invalid_argument(fmt::format("clause {} has {} literals; only 3-literal clauses are supported",
                                                  cnf.clauses.size() + 1, current.size()));
        }
        cnf.clauses.push_back({current[0], current[1], current[2]});
        current.clear();
        continue;
      }
      if (std::abs(lit) > cnf.variables) throw std::invalid_argument(fmt::format("literal {} out of range", lit));
      current.push_back(lit);
    }
  }
  if (!current.empty()) throw std::invalid_argument("unterminated DIMACS clause");
  if (declared_clauses < 0) throw std::invalid_argument("missing DIMACS problem line");
  if (static_cast<int>(cnf.clauses.size()) != declared_clauses) {
    throw std::invalid_argument(
        fmt::format("DIMACS header declares {} clauses, found {}", declared_clauses, cnf.clauses.size()));
  }
  return cnf;
}

LayeredEnsemble sat3_ensemble(const Cnf& cnf) {
  const int n = cnf.variables;
  if (n < 1 || n > kSat3MaxVariables) {
    throw CapacityError(fmt::format("3-SAT ensemble supports 1..{} variables, got {}", kSat3MaxVariables, n));
  }
  auto clause_gate = [n](const std::array<int, 3>& clause) {
    std::array<int, 3> cells{};
    unsigned negated = 0;
    for (int i = 0; i < 3; ++i) {
      const int lit = clause[static_cast<std::size_t>(i)];
      if (lit == 0 || std::abs(lit) > n) throw std::invalid_argument("clause literal out of range");
      cells[static_cast<std::size_t>(i)] = std::abs(lit) - 1;
      if (lit < 0) negated |= 1u << i;
    }
    return Gate::or3(cells, n, negated);
  };

  std::vector<int> widths{n, n};
  std::vector<LayerTransition> transitions;
  {
    std::vector<Gate> mixing;
    for (int i = 0; i < n; ++i) mixing.push_back(Gate::mix(i, i));
    transitions.push_back(LayerTransition::from_gates(n, n, std::move(mixing)));
  }
  for (std::size_t c = 0; c < cnf.clauses.size(); ++c) {
    const int in_width = widths.back();
    std::vector<Gate> gates;
    for (int i = 0; i < n; ++i) gates.push_back(Gate::wire(i, i));
    // The previous clause output must be 1; it is absorbed here.
    if (in_width == n + 1) gates.push_back(Gate::custom({n}, {}, {0.0, 1.0}));
    gates.push_back(clause_gate(cnf.clauses[c]));
    transitions.push_back(LayerTransition::from_gates(in_width, n + 1, std::move(gates)));
    widths.push_back(n + 1);
  }

  std::vector<double> psi_left(pattern_count(n), 1.0);
  std::vector<double> psi_right(pattern_count(widths.back()), 1.0);
  if (!cnf.clauses.empty()) {
    for (std::size_t y = 0; y < psi_right.size(); ++y) psi_right[y] = (y & 1u) ? 1.0 : 0.0;
  }
  return LayeredEnsemble(std::move(widths), std::move(transitions), std::move(psi_left), std::move(psi_right));
}

std::vector<double> sat3_posterior(const Cnf& cnf) {
  const EnsembleMarginals m = ensemble_distribution(sat3_ensemble(cnf));
  return m.layers[1];
}

}  // namespace merw
