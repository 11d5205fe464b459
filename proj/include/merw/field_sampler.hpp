#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "merw/scan_model.hpp"

namespace merw {

struct Field {
  int rows = 0;
  int cols = 0;
  std::vector<std::int8_t> cells;  // +-1, row-major
  std::uint64_t seed = 0;
  std::string model_hash;

  int at(int r, int c) const { return cells[static_cast<std::size_t>(r) * static_cast<std::size_t>(cols) + c]; }
};

// Line-by-line scan. Cell (r, c) uses the reduced model with
// before' = min(before, c) and after' = (r > 0 ? min(after, cols - c) : 0),
// one uniform draw per cell in row-major order; spin +1 iff draw < p.
// Throws std::invalid_argument before drawing anything when a required
// reduced shape is missing.
Field sample_field(const ScanModel& model, const ReducedFamily& reduced, int rows, int cols, std::uint64_t seed);

// Interior-only frequencies of 1 x k windows (key: bits MSB-first) and 2 x k
// windows (key: upper bits << k | lower bits). k in [1, 4].
struct PatternFrequencies {
  int k = 0;
  std::vector<double> single_row;
  std::vector<double> two_row;
};

PatternFrequencies empirical_pattern_distribution(const Field& field, int k);

double total_variation(std::span<const double> p, std::span<const double> q);

// Plain PBM (P1), +1 -> 1.
void write_pbm(std::ostream& out, const Field& field);
Field read_pbm(std::istream& in);

// {"seed", "rows", "cols", "model_hash"}
std::string field_sidecar_json(const Field& field);

}  // namespace merw
