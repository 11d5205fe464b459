#include "merw/pattern_space.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace merw {

namespace {

void check_energy_value(double e) {
  if (std::isnan(e) || e == -std::numeric_limits<double>::infinity()) {
    throw std::invalid_argument("energies must be finite or +inf");
  }
}

// Finite values add normally; anything plus +inf stays +inf.
double energy_of(PatternIndex index, int width, bool cyclic, const LocalEnergies& e) {
  auto bit = [&](int p) { return static_cast<int>((index >> (width - 1 - p)) & 1u); };
  double total = 0.0;
  for (int p = 0; p < width; ++p) total += e.node[bit(p)];
  for (int p = 0; p + 1 < width; ++p) total += e.hbond[bit(p)][bit(p + 1)];
  // The wrap bond is added even for width 1 and 2, where it closes onto an
  // existing neighbour.
  if (cyclic) total += e.hbond[bit(width - 1)][bit(0)];
  return total;
}

}  // namespace

void ModelParams::validate() const {
  if (width < 1 || width > kMaxPatternWidth) {
    throw std::invalid_argument("width must be in [1, " + std::to_string(kMaxPatternWidth) + "]");
  }
  if (!(beta > 0.0) || !std::isfinite(beta)) throw std::invalid_argument("beta must be > 0");
  if (!std::isfinite(mu) || !std::isfinite(jh) || !std::isfinite(jv)) {
    throw std::invalid_argument("couplings must be finite");
  }
}

InteractionSpec InteractionSpec::ising() { return InteractionSpec{}; }

InteractionSpec InteractionSpec::hard_square() {
  InteractionSpec s;
  s.kind_ = InteractionKind::hard_square;
  s.table_.hbond[1][1] = kForbidden;
  s.table_.vbond[1][1] = kForbidden;
  return s;
}

InteractionSpec InteractionSpec::custom(const LocalEnergies& energies) {
  for (double e : energies.node) check_energy_value(e);
  for (const auto& row : energies.hbond)
    for (double e : row) check_energy_value(e);
  for (const auto& row : energies.vbond)
    for (double e : row) check_energy_value(e);
  InteractionSpec s;
  s.kind_ = InteractionKind::custom;
  s.table_ = energies;
  return s;
}

LocalEnergies InteractionSpec::energies(const ModelParams& params) const {
  if (kind_ != InteractionKind::ising) return table_;
  LocalEnergies e;
  for (int a = 0; a < 2; ++a) {
    const double sa = 2.0 * a - 1.0;
    e.node[a] = -params.mu * sa;
    for (int b = 0; b < 2; ++b) {
      const double sb = 2.0 * b - 1.0;
      e.hbond[a][b] = -params.jh * sa * sb;
      e.vbond[a][b] = -params.jv * sa * sb;
    }
  }
  return e;
}

bool InteractionSpec::symmetric() const {
  return kind_ != InteractionKind::custom || table_.vbond[0][1] == table_.vbond[1][0];
}

SpinPattern::SpinPattern(PatternIndex index, int width) : index_(index), width_(width) {
  if (width < 1 || width > kMaxPatternWidth) throw std::out_of_range("pattern width out of range");
  if (index >= (PatternIndex{1} << width)) {
    throw std::out_of_range("pattern index " + std::to_string(index) + " out of range for width " +
                            std::to_string(width));
  }
}

SpinPattern SpinPattern::from_spins(std::span<const int> spins) {
  if (spins.empty() || spins.size() > static_cast<std::size_t>(kMaxPatternWidth)) {
    throw std::out_of_range("pattern width out of range");
  }
  PatternIndex index = 0;
  for (int s : spins) {
    if (s != 1 && s != -1) throw std::invalid_argument("spins must be +1 or -1");
    index = (index << 1) | (s > 0 ? 1u : 0u);
  }
  return SpinPattern(index, static_cast<int>(spins.size()));
}

std::vector<int> SpinPattern::spins() const {
  std::vector<int> out(static_cast<std::size_t>(width_));
  for (int p = 0; p < width_; ++p) out[static_cast<std::size_t>(p)] = spin(p);
  return out;
}

SpinPattern SpinPattern::flipped() const {
  const PatternIndex mask = (PatternIndex{1} << width_) - 1;
  return SpinPattern(~index_ & mask, width_);
}

double pattern_energy(const SpinPattern& p, const ModelParams& params, const InteractionSpec& spec) {
  if (p.width() != params.width) throw std::invalid_argument("pattern width does not match params");
  return energy_of(p.index(), p.width(), params.cyclic, spec.energies(params));
}

double interaction_energy(const SpinPattern& u, const SpinPattern& v, const ModelParams& params,
                          const InteractionSpec& spec) {
  if (u.width() != v.width()) throw std::invalid_argument("pattern widths differ");
  const LocalEnergies e = spec.energies(params);
  double total = 0.0;
  for (int p = 0; p < u.width(); ++p) total += e.vbond[u.bit(p)][v.bit(p)];
  return total;
}

std::vector<double> all_pattern_energies(const ModelParams& params, const InteractionSpec& spec) {
  params.validate();
  const LocalEnergies e = spec.energies(params);
  const std::size_t n = pattern_count(params.width);
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = energy_of(static_cast<PatternIndex>(i), params.width, params.cyclic, e);
  }
  return out;
}

}  // namespace merw
