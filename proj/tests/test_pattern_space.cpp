#include <doctest.h>

#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

#include "merw/pattern_space.hpp"
#include "oracles.hpp"

using namespace merw;

namespace {

ModelParams ising(int width, bool cyclic, double jh, double jv, double mu) {
  ModelParams p;
  p.width = width;
  p.cyclic = cyclic;
  p.jh = jh;
  p.jv = jv;
  p.mu = mu;
  return p;
}

SpinPattern spins(std::vector<int> s) { return SpinPattern::from_spins(s); }

}  // namespace

TEST_CASE("pattern energy of an aligned open stripe") {
  const auto p = ising(3, false, 1.0, 0.0, 0.5);
  CHECK(pattern_energy(spins({1, 1, 1}), p, InteractionSpec::ising()) == doctest::Approx(-3.5).epsilon(1e-15));
}

TEST_CASE("cyclic stripe adds the wrap bond") {
  const auto p = ising(3, true, 1.0, 0.0, 0.5);
  CHECK(pattern_energy(spins({1, 1, 1}), p, InteractionSpec::ising()) == doctest::Approx(-4.5).epsilon(1e-15));
}

TEST_CASE("cyclic width 2 counts its single bond twice") {
  const auto p = ising(2, true, 1.0, 0.0, 0.0);
  CHECK(pattern_energy(spins({1, -1}), p, InteractionSpec::ising()) == 2.0);
  CHECK(pattern_energy(spins({1, 1}), p, InteractionSpec::ising()) == -2.0);
}

TEST_CASE("hard-square forbids adjacent ones") {
  ModelParams p;
  p.width = 2;
  const auto hs = InteractionSpec::hard_square();
  CHECK(std::isinf(pattern_energy(SpinPattern(3, 2), p, hs)));
  CHECK(pattern_energy(SpinPattern(2, 2), p, hs) == 0.0);
  CHECK(std::isinf(interaction_energy(SpinPattern(2, 2), SpinPattern(2, 2), p, hs)));
  CHECK(interaction_energy(SpinPattern(2, 2), SpinPattern(1, 2), p, hs) == 0.0);
}

TEST_CASE("interaction energy examples") {
  const auto p = ising(3, false, 0.0, 1.0, 0.0);
  CHECK(interaction_energy(spins({1, 1, 1}), spins({1, 1, 1}), p, InteractionSpec::ising()) == -3.0);
  CHECK(interaction_energy(spins({1, 1, 1}), spins({-1, -1, -1}), p, InteractionSpec::ising()) == 3.0);
}

TEST_CASE("encode and decode") {
  CHECK(SpinPattern(5, 3).spins() == std::vector<int>{1, -1, 1});
  CHECK(SpinPattern(0, 1).spins() == std::vector<int>{-1});
  CHECK(spins({-1, -1, -1, -1}).index() == 0u);
  CHECK(spins({1, -1, -1}).index() == 4u);
  CHECK_THROWS_AS(SpinPattern(8, 3), std::out_of_range);
  CHECK_THROWS_AS(SpinPattern(0, 0), std::out_of_range);
  CHECK_THROWS(SpinPattern::from_spins(std::vector<int>{1, 0}));
  for (int w = 1; w <= 8; ++w)
    for (PatternIndex i = 0; i < pattern_count(w); ++i) {
      const SpinPattern s(i, w);
      REQUIRE(SpinPattern::from_spins(s.spins()) == s);
      REQUIRE(s.flipped().index() == ((1u << w) - 1 - i));
    }
}

TEST_CASE("allowed hard-square patterns follow Fibonacci and Lucas counts") {
  const auto hs = InteractionSpec::hard_square();
  // open: F(w+2); cyclic: L(w)
  const int fib[] = {0, 1, 1, 2, 3, 5, 8, 13, 21, 34, 55, 89, 144, 233};
  const int lucas[] = {2, 1, 3, 4, 7, 11, 18, 29, 47, 76, 123, 199};
  for (int w = 2; w <= 11; ++w) {
    ModelParams p;
    p.width = w;
    int open = 0;
    int cyc = 0;
    for (PatternIndex i = 0; i < pattern_count(w); ++i) {
      p.cyclic = false;
      open += std::isfinite(pattern_energy(SpinPattern(i, w), p, hs));
      p.cyclic = true;
      cyc += std::isfinite(pattern_energy(SpinPattern(i, w), p, hs));
    }
    CHECK(open == fib[w + 2]);
    if (w >= 3) CHECK(cyc == lucas[w]);
  }
}

TEST_CASE("energies match a direct spin sum") {
  std::mt19937_64 gen(7);
  std::uniform_real_distribution<double> coupling(-1.5, 1.5);
  for (int trial = 0; trial < 20; ++trial) {
    const int w = 1 + trial % 7;
    const bool cyc = trial % 2;
    const auto p = ising(w, cyc, coupling(gen), coupling(gen), coupling(gen));
    const auto energies = all_pattern_energies(p, InteractionSpec::ising());
    for (PatternIndex u = 0; u < pattern_count(w); ++u) {
      CHECK(energies[u] == doctest::Approx(oracle::ising_stripe_energy(u, w, p.jh, p.mu, cyc)).epsilon(1e-13));
      const PatternIndex v = (u * 2654435761u) % pattern_count(w);
      CHECK(interaction_energy(SpinPattern(u, w), SpinPattern(v, w), p, InteractionSpec::ising()) ==
            doctest::Approx(oracle::ising_coupling_energy(u, v, w, p.jv)).epsilon(1e-13));
    }
  }
}

TEST_CASE("zero field energies are invariant under global flip") {
  const auto p = ising(6, true, 0.7, -0.3, 0.0);
  const auto spec = InteractionSpec::ising();
  for (PatternIndex u = 0; u < 64; ++u) {
    const SpinPattern s(u, 6);
    CHECK(pattern_energy(s, p, spec) == pattern_energy(s.flipped(), p, spec));
    const SpinPattern t((u * 37 + 11) % 64, 6);
    CHECK(interaction_energy(s, t, p, spec) == interaction_energy(s.flipped(), t.flipped(), p, spec));
    CHECK(interaction_energy(s, t, p, spec) == interaction_energy(t, s, p, spec));
  }
}

TEST_CASE("custom energies") {
  LocalEnergies e;
  e.node = {0.0, 0.25};
  e.hbond[1][1] = kForbidden;
  e.vbond[0][1] = 0.5;
  e.vbond[1][0] = 0.5;
  const auto spec = InteractionSpec::custom(e);
  CHECK(spec.symmetric());
  ModelParams p;
  p.width = 3;
  CHECK(pattern_energy(SpinPattern(5, 3), p, spec) == 0.5);
  CHECK(std::isinf(pattern_energy(SpinPattern(6, 3), p, spec)));
  CHECK(interaction_energy(SpinPattern(4, 3), SpinPattern(0, 3), p, spec) == 0.5);

  e.vbond[1][0] = 0.0;
  CHECK_FALSE(InteractionSpec::custom(e).symmetric());
  e.node[0] = std::nan("");
  CHECK_THROWS_AS(InteractionSpec::custom(e), std::invalid_argument);
  e.node[0] = -kForbidden;
  CHECK_THROWS_AS(InteractionSpec::custom(e), std::invalid_argument);
}

TEST_CASE("parameter validation") {
  ModelParams p;
  p.width = 0;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p.width = 4;
  p.beta = 0.0;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p.beta = 1.0;
  p.jh = INFINITY;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p.jh = 0.5;
  CHECK_NOTHROW(p.validate());
}
