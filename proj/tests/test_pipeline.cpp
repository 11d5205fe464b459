#include <doctest.h>

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "merw/pipeline.hpp"

using namespace merw;

TEST_CASE("sweep rows are sorted and compared with the exact solution") {
  SweepSpec spec;
  spec.j_min = 0.0;
  spec.j_max = 0.6;
  spec.steps = 4;
  spec.widths = {9, 7};
  const auto rows = run_sweep(spec);
  REQUIRE(rows.size() == 8);
  for (std::size_t i = 1; i < rows.size(); ++i) {
    CHECK((rows[i - 1].J < rows[i].J || (rows[i - 1].J == rows[i].J && rows[i - 1].width < rows[i].width)));
  }
  CHECK(rows.back().J == 0.6);
  for (const auto& r : rows) {
    CHECK(r.status == "ok");
    CHECK(r.err_U == doctest::Approx(r.U_merw - r.U_exact));
  }
  CHECK(std::abs(rows[0].err_U) < 1e-14);
  CHECK(std::abs(rows[0].err_H) < 1e-14);
}

TEST_CASE("wider stripes are more accurate") {
  SweepSpec spec;
  spec.j_min = 0.2;
  spec.j_max = 0.3;
  spec.steps = 2;
  spec.widths = {10, 13};
  const auto rows = run_sweep(spec);
  REQUIRE(rows.size() == 4);
  CHECK(rows[3].J == 0.3);
  CHECK(std::abs(rows[3].err_H) <= 1.1 * std::abs(rows[2].err_H));
}

TEST_CASE("failing rows keep their message") {
  SweepSpec spec;
  spec.j_min = 0.1;
  spec.j_max = 0.2;
  spec.steps = 2;
  spec.widths = {4, 6};
  spec.before = 3;
  const auto rows = run_sweep(spec);
  CHECK(rows[0].status.find("does not fit") != std::string::npos);
  CHECK(std::isnan(rows[0].U_merw));
  CHECK(rows[1].status == "ok");
  const std::string csv = sweep_csv(rows);
  CHECK(csv.rfind("J,width,U_merw,H_merw,U_exact,H_exact,err_U,err_H,status\n", 0) == 0);
  std::istringstream in(csv);
  std::string line;
  int lines = 0;
  while (std::getline(in, line)) {
    ++lines;
    int commas = 0;
    for (char c : line) commas += c == ',';
    CHECK(commas == 8);
  }
  CHECK(lines == 5);
}

TEST_CASE("sweep validation") {
  SweepSpec spec;
  spec.j_min = 0.5;
  spec.j_max = 0.5;
  CHECK_THROWS_AS(run_sweep(spec), std::invalid_argument);
  spec.j_max = 1.0;
  spec.steps = 1;
  CHECK_THROWS_AS(run_sweep(spec), std::invalid_argument);
  spec.steps = 3;
  spec.widths.clear();
  CHECK_THROWS_AS(run_sweep(spec), std::invalid_argument);
}

TEST_CASE("representation choice by width") {
  CHECK(auto_representation(12) == Representation::dense);
  CHECK(auto_representation(13) == Representation::implicit);
}
