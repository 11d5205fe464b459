#include "merw/field_sampler.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <istream>
#include <ostream>
#include <stdexcept>

#include <fmt/format.h>

#include "merw/rng.hpp"

namespace merw {

Field sample_field(const ScanModel& model, const ReducedFamily& reduced, int rows, int cols, std::uint64_t seed) {
  if (rows < 1 || cols < 1) throw std::invalid_argument("field dimensions must be positive");
  const int b = model.shape().before;
  const int a = model.shape().after;

  // Resolve every shape the scan will touch up front.
  auto shape_for = [&](int r, int c) {
    const int bb = std::min(b, c);
    const int aa = r > 0 ? std::min(a, cols - c) : 0;
    return std::pair{bb, aa};
  };
  std::vector<const ScanModel*> first_row(static_cast<std::size_t>(cols));
  std::vector<const ScanModel*> later_rows(static_cast<std::size_t>(cols));
  for (int c = 0; c < cols; ++c) {
    for (int r : {0, 1}) {
      const auto [bb, aa] = shape_for(r, c);
      const ScanModel* m = nullptr;
      if (bb == b && aa == a) {
        m = &model;
      } else if (reduced.contains(bb, aa)) {
        m = &reduced.at(bb, aa);
      } else {
        throw std::invalid_argument(
            fmt::format("reduced model family lacks shape (before={}, after={}) needed at column {}", bb, aa, c));
      }
      (r == 0 ? first_row : later_rows)[static_cast<std::size_t>(c)] = m;
    }
  }

  Field field;
  field.rows = rows;
  field.cols = cols;
  field.seed = seed;
  field.model_hash = model_hash(model);
  field.cells.assign(static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols), 0);

  Rng rng(seed);
  for (int r = 0; r < rows; ++r) {
    std::int8_t* row = field.cells.data() + static_cast<std::size_t>(r) * cols;
    const std::int8_t* above = r > 0 ? row - cols : nullptr;
    for (int c = 0; c < cols; ++c) {
      const ScanModel& m = *(r == 0 ? first_row : later_rows)[static_cast<std::size_t>(c)];
      const int bb = m.shape().before;
      const int aa = m.shape().after;
      std::size_t key = 0;
      for (int i = c - bb; i < c; ++i) key = (key << 1) | (row[i] > 0 ? 1u : 0u);
      for (int i = c; i < c + aa; ++i) key = (key << 1) | (above[i] > 0 ? 1u : 0u);
      row[c] = rng.uniform01() < m.p_plus(key) ? 1 : -1;
    }
  }
  return field;
}

PatternFrequencies empirical_pattern_distribution(const Field& field, int k) {
  if (k < 1 || k > 4) throw std::invalid_argument("pattern width must be in [1, 4]");
  if (field.rows < 2 || field.cols < k) throw std::invalid_argument("field smaller than the pattern");
  PatternFrequencies out;
  out.k = k;
  out.single_row.assign(std::size_t{1} << k, 0.0);
  out.two_row.assign(std::size_t{1} << (2 * k), 0.0);
  auto key_at = [&](int r, int c) {
    std::size_t key = 0;
    for (int i = 0; i < k; ++i) key = (key << 1) | (field.at(r, c + i) > 0 ? 1u : 0u);
    return key;
  };
  std::uint64_t singles = 0;
  std::uint64_t pairs = 0;
  for (int r = 0; r < field.rows; ++r) {
    for (int c = 0; c + k <= field.cols; ++c) {
      const std::size_t top = key_at(r, c);
      out.single_row[top] += 1.0;
      ++singles;
      if (r + 1 < field.rows) {
        out.two_row[(top << k) | key_at(r + 1, c)] += 1.0;
        ++pairs;
      }
    }
  }
  for (double& v : out.single_row) v /= static_cast<double>(singles);
  for (double& v : out.two_row) v /= static_cast<double>(pairs);
  return out;
}

double total_variation(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size()) throw std::invalid_argument("distributions have different supports");
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) s += std::abs(p[i] - q[i]);
  return 0.5 * s;
}

void write_pbm(std::ostream& out, const Field& field) {
  out << "P1\n";
  out << "# seed " << field.seed << " model " << field.model_hash << "\n";
  out << field.cols << " " << field.rows << "\n";
  for (int r = 0; r < field.rows; ++r) {
    int column = 0;
    for (int c = 0; c < field.cols; ++c) {
      if (column >= 70) {
        out << "\n";
        column = 0;
      }
      out << (field.at(r, c) > 0 ? '1' : '0');
      ++column;
    }
    out << "\n";
  }
}

namespace {

// Next whitespace-separated token, skipping '#' comments.
std::string pbm_token(std::istream& in) {
  std::string tok;
  char ch;
  while (in.get(ch)) {
    if (ch == '#') {
      std::string skip;
      std::getline(in, skip);
      if (!tok.empty()) break;
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(ch))) {
      if (!tok.empty()) break;
      continue;
    }
    tok.push_back(ch);
  }
  return tok;
}

}  // namespace

Field read_pbm(std::istream& in) {
  if (pbm_token(in) != "P1") throw std::invalid_argument("not a plain PBM (P1) file");
  Field f;
  try {
    f.cols = std::stoi(pbm_token(in));
    f.rows = std::stoi(pbm_token(in));
  } catch (const std::exception&) {
    throw std::invalid_argument("malformed PBM header");
  }
  if (f.rows < 1 || f.cols < 1) throw std::invalid_argument("malformed PBM header");
  const std::size_t n = static_cast<std::size_t>(f.rows) * static_cast<std::size_t>(f.cols);
  f.cells.reserve(n);
  char ch;
  while (f.cells.size() < n && in.get(ch)) {
    if (ch == '#') {
      std::string skip;
      std::getline(in, skip);
    } else if (ch == '0' || ch == '1') {
      f.cells.push_back(ch == '1' ? 1 : -1);
    } else if (!std::isspace(static_cast<unsigned char>(ch))) {
      throw std::invalid_argument("unexpected character in PBM raster");
    }
  }
  if (f.cells.size() != n) throw std::invalid_argument("truncated PBM raster");
  return f;
}

std::string field_sidecar_json(const Field& field) {
  return fmt::format("{{\"seed\": {}, \"rows\": {}, \"cols\": {}, \"model_hash\": \"{}\"}}\n", field.seed,
                     field.rows, field.cols, field.model_hash);
}

}  // namespace merw
