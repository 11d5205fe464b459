#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

namespace merw {

using PatternIndex = std::uint32_t;

// Energy of a forbidden configuration; maps to a transition weight of exactly 0.
inline constexpr double kForbidden = std::numeric_limits<double>::infinity();

inline constexpr int kMaxPatternWidth = 30;

struct ModelParams {
  double beta = 1.0;
  double mu = 0.0;
  double jh = 0.0;  // intra-stripe coupling
  double jv = 0.0;  // inter-stripe coupling
  int width = 1;
  bool cyclic = false;

  // Throws std::invalid_argument on width < 1, beta <= 0 or non-finite couplings.
  void validate() const;
};

enum class InteractionKind { ising, hard_square, custom };

// Local energy tables indexed by bit (0 <-> spin -1, 1 <-> spin +1).
// hbond[left][right] acts along a stripe, vbond[previous][next] between
// adjacent stripes. Values are finite or +inf.
struct LocalEnergies {
  std::array<double, 2> node{};
  std::array<std::array<double, 2>, 2> hbond{};
  std::array<std::array<double, 2>, 2> vbond{};
};

class InteractionSpec {
 public:
  // E = -mu*s - Jh*s*s_right - Jv*s*s_below, couplings taken from ModelParams.
  static InteractionSpec ising();
  // Uniform ensemble over configurations without two adjacent 1s (spin +1).
  static InteractionSpec hard_square();
  // Tabulated energies; ModelParams couplings are ignored.
  static InteractionSpec custom(const LocalEnergies& energies);

  InteractionKind kind() const { return kind_; }
  LocalEnergies energies(const ModelParams& params) const;
  bool symmetric() const;

 private:
  InteractionKind kind_ = InteractionKind::ising;
  LocalEnergies table_{};
};

class SpinPattern {
 public:
  SpinPattern(PatternIndex index, int width);

  static SpinPattern from_spins(std::span<const int> spins);

  PatternIndex index() const { return index_; }
  int width() const { return width_; }

  // Position 0 is the leftmost cell and the most significant bit.
  int bit(int position) const { return static_cast<int>((index_ >> (width_ - 1 - position)) & 1u); }
  int spin(int position) const { return 2 * bit(position) - 1; }
  std::vector<int> spins() const;
  SpinPattern flipped() const;

  friend bool operator==(const SpinPattern&, const SpinPattern&) = default;

 private:
  PatternIndex index_;
  int width_;
};

inline std::size_t pattern_count(int width) { return std::size_t{1} << width; }

double pattern_energy(const SpinPattern& p, const ModelParams& params, const InteractionSpec& spec);
double interaction_energy(const SpinPattern& u, const SpinPattern& v, const ModelParams& params,
                          const InteractionSpec& spec);

// pattern_energy for every index in [0, 2^width).
std::vector<double> all_pattern_energies(const ModelParams& params, const InteractionSpec& spec);

}  // namespace merw
