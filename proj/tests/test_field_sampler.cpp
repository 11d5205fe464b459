#include <doctest.h>

#include <cmath>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "merw/field_sampler.hpp"
#include "merw/scan_model.hpp"
#include "merw/transfer_operator.hpp"

using namespace merw;

namespace {

struct Setup {
  TransferOperator op;
  SpectralSolution sol;
  ScanModel model;
};

Setup setup(double J, int width = 10, int b = 3, int a = 3) {
  ModelParams p;
  p.width = width;
  p.cyclic = true;
  p.jh = p.jv = J;
  auto op = TransferOperator::build(p, InteractionSpec::ising(), Representation::implicit);
  auto sol = dominant_eigenpair(op);
  auto model = derive_model(sol, op, b, a);
  return {std::move(op), std::move(sol), std::move(model)};
}

double mean_spin(const Field& f) {
  double s = 0;
  for (auto c : f.cells) s += c;
  return s / static_cast<double>(f.cells.size());
}

// Interior nearest-neighbour energy per node, J (s s_right + s s_down).
double field_energy(const Field& f, double J) {
  double h = 0, v = 0;
  long nh = 0, nv = 0;
  for (int r = 0; r < f.rows; ++r)
    for (int c = 0; c < f.cols; ++c) {
      if (c + 1 < f.cols) h += f.at(r, c) * f.at(r, c + 1), ++nh;
      if (r + 1 < f.rows) v += f.at(r, c) * f.at(r + 1, c), ++nv;
    }
  return -J * (h / nh + v / nv);
}

}  // namespace

TEST_CASE("independent spins give a fair coin field") {
  const auto s = setup(0.0);
  const auto fam = reduced_models(s.model);
  const auto f = sample_field(s.model, fam, 64, 64, 11);
  CHECK(f.cells.size() == 4096);
  CHECK(std::abs(mean_spin(f)) < 4.0 / 64.0);
  const auto freq = empirical_pattern_distribution(f, 1);
  CHECK(freq.single_row[0] == doctest::Approx(0.5).epsilon(0.1));
  CHECK(freq.single_row[1] == doctest::Approx(0.5).epsilon(0.1));
}

TEST_CASE("sampling is deterministic in the seed") {
  const auto s = setup(0.3);
  const auto fam = reduced_models(s.model);
  const auto a = sample_field(s.model, fam, 40, 50, 99);
  const auto b = sample_field(s.model, fam, 40, 50, 99);
  const auto c = sample_field(s.model, fam, 40, 50, 100);
  CHECK(a.cells == b.cells);
  CHECK(a.cells != c.cells);
  CHECK(a.seed == 99);
  CHECK(a.model_hash == model_hash(s.model));
}

TEST_CASE("sampled energy and block statistics match the model") {
  const double J = 0.2;
  const auto s = setup(J, 12);
  const auto fam = reduced_models(s.model);
  const auto f = sample_field(s.model, fam, 384, 384, 5);
  CHECK(std::abs(field_energy(f, J) - observables(s.model).energy) < 0.01);

  const auto blocks = block_distribution(s.sol, s.op, 2, default_block_start(12, 2));
  const auto freq = empirical_pattern_distribution(f, 2);
  CHECK(total_variation(freq.two_row, blocks) <= 5.0 / 384.0);
}

TEST_CASE("missing reduced shapes are rejected before sampling") {
  const auto s = setup(0.3, 10, 3, 3);
  const auto small = setup(0.3, 10, 2, 2);
  const auto fam = reduced_models(small.model);
  CHECK_THROWS_AS(sample_field(s.model, fam, 8, 8, 1), std::invalid_argument);
  CHECK_THROWS_AS(sample_field(s.model, reduced_models(s.model), 0, 8, 1), std::invalid_argument);
}

TEST_CASE("narrow fields only need the shapes they touch") {
  const auto s = setup(0.3, 10, 3, 3);
  const auto f = sample_field(s.model, reduced_models(s.model), 5, 2, 3);
  CHECK(f.cells.size() == 10);
}

TEST_CASE("empirical pattern distribution") {
  Field f;
  f.rows = 6;
  f.cols = 7;
  f.cells.assign(42, 1);
  for (int k = 1; k <= 4; ++k) {
    const auto freq = empirical_pattern_distribution(f, k);
    CHECK(freq.single_row.size() == (std::size_t{1} << k));
    CHECK(freq.two_row.size() == (std::size_t{1} << (2 * k)));
    CHECK(freq.single_row.back() == 1.0);
    CHECK(freq.two_row.back() == 1.0);
  }
  f.cells[0] = -1;
  const auto freq = empirical_pattern_distribution(f, 2);
  double total = 0;
  for (double x : freq.two_row) total += x;
  CHECK(total == doctest::Approx(1.0));
  CHECK(freq.two_row[0b0111] == doctest::Approx(1.0 / 30));
  CHECK_THROWS_AS(empirical_pattern_distribution(f, 5), std::invalid_argument);
  CHECK_THROWS_AS(empirical_pattern_distribution(f, 0), std::invalid_argument);
  f.cols = 2;
  f.cells.resize(12);
  CHECK_THROWS_AS(empirical_pattern_distribution(f, 3), std::invalid_argument);
}

TEST_CASE("total variation") {
  const std::vector<double> p{0.5, 0.5, 0.0};
  const std::vector<double> q{0.25, 0.25, 0.5};
  CHECK(total_variation(p, q) == doctest::Approx(0.5));
  CHECK(total_variation(p, p) == 0.0);
  CHECK_THROWS_AS(total_variation(p, std::vector<double>{1.0}), std::invalid_argument);
}

TEST_CASE("PBM round trip and sidecar") {
  const auto s = setup(0.4, 8, 2, 2);
  const auto f = sample_field(s.model, reduced_models(s.model), 13, 101, 8);
  std::stringstream io;
  write_pbm(io, f);
  const std::string text = io.str();
  CHECK(text.rfind("P1\n", 0) == 0);
  std::istringstream line_check(text);
  for (std::string line; std::getline(line_check, line);) CHECK(line.size() <= 70);
  const auto back = read_pbm(io);
  CHECK(back.rows == 13);
  CHECK(back.cols == 101);
  CHECK(back.cells == f.cells);

  const auto side = nlohmann::json::parse(field_sidecar_json(f));
  CHECK(side.at("seed").get<std::uint64_t>() == 8);
  CHECK(side.at("rows").get<int>() == 13);
  CHECK(side.at("cols").get<int>() == 101);
  CHECK(side.at("model_hash").get<std::string>() == model_hash(s.model));

  std::istringstream bad("P4\n2 2\n0101");
  CHECK_THROWS(read_pbm(bad));
  std::istringstream shortfile("P1\n2 2\n0 1 1");
  CHECK_THROWS(read_pbm(shortfile));
  std::istringstream commented("P1\n# note\n2 1\n1 0\n");
  const auto c = read_pbm(commented);
  CHECK(c.cells == std::vector<std::int8_t>{1, -1});
}
