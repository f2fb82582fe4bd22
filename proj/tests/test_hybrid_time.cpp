#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>
#include <stdexcept>

#include "hmpc/hybrid_time.hpp"

using hmpc::HybridTime;
using hmpc::HybridTimeDomain;

TEST_CASE("ordering follows elapsed hybrid time t + j") {
  CHECK(HybridTime{0.5, 0} < HybridTime{0.0, 1});
  CHECK(HybridTime{1.0, 1} < HybridTime{0.5, 2});
  CHECK(HybridTime{1.0, 1} <= HybridTime{1.0, 1});
  CHECK(HybridTime{0.25, 0}.elapsed() == doctest::Approx(0.25));
  CHECK(HybridTime{0.25, 2}.elapsed() == doctest::Approx(2.25));
}

TEST_CASE("membership in the interval union") {
  const HybridTimeDomain dom({0.0, 0.5, 1.0});
  CHECK(dom.jump_count() == 1);
  CHECK(dom.contains({0.25, 0}));
  // A jump instant belongs to both adjacent levels.
  CHECK(dom.contains({0.5, 0}));
  CHECK(dom.contains({0.5, 1}));
  // Past the jump at level 0.
  CHECK_FALSE(dom.contains({0.75, 0}));
  CHECK_FALSE(dom.contains({0.25, 2}));
}

TEST_CASE("constructor validation") {
  CHECK_THROWS_AS(HybridTimeDomain({0.5, 1.0}), std::invalid_argument);
  CHECK_THROWS_AS(HybridTimeDomain({0.0, 1.0, 0.5}), std::invalid_argument);
  CHECK_THROWS_AS(HybridTimeDomain({0.0}), std::invalid_argument);
  CHECK_NOTHROW(HybridTimeDomain({0.0, 1.0, 1.0, 2.0}));
}

TEST_CASE("truncation produces the generalized jump-time sequence") {
  const HybridTimeDomain dom({0.0, 0.5, 1.0});

  SUBCASE("cut inside the last interval") {
    const HybridTimeDomain cut = dom.truncate({0.7, 1});
    CHECK(cut.approx_equal(HybridTimeDomain({0.0, 0.5, 0.7})));
  }
  SUBCASE("cut exactly at a jump yields a degenerate final interval") {
    const HybridTimeDomain cut = dom.truncate({0.5, 1});
    CHECK(cut.approx_equal(HybridTimeDomain({0.0, 0.5, 0.5})));
  }
  SUBCASE("two jumps at the same instant") {
    const HybridTimeDomain twin({0.0, 1.0, 1.0, 2.0});
    CHECK(twin.truncate({1.0, 1}).approx_equal(HybridTimeDomain({0.0, 1.0, 1.0})));
  }
  SUBCASE("out-of-domain point") {
    CHECK_THROWS_AS(dom.truncate({0.75, 0}), std::domain_error);
  }
}

TEST_CASE("concatenation shifts and fuses boundary flow intervals") {
  SUBCASE("flow-flow merge keeps one level") {
    const HybridTimeDomain merged =
        HybridTimeDomain({0.0, 1.0}).concatenate(HybridTimeDomain({0.0, 2.0}));
    CHECK(merged.approx_equal(HybridTimeDomain({0.0, 3.0})));
    CHECK(merged.jump_count() == 0);
  }
  SUBCASE("shift by the prefix terminal time") {
    const HybridTimeDomain merged =
        HybridTimeDomain({0.0, 1.0, 1.0})
            .concatenate(HybridTimeDomain({0.0, 0.5}));
    CHECK(merged.approx_equal(HybridTimeDomain({0.0, 1.0, 1.5})));
    CHECK(merged.jump_count() == 1);
  }
  SUBCASE("degenerate point domain is a concatenation identity") {
    const HybridTimeDomain dom({0.0, 0.5, 1.0});
    CHECK(dom.concatenate(HybridTimeDomain::point()).approx_equal(dom));
    CHECK(HybridTimeDomain::point().concatenate(dom).approx_equal(dom));
  }
}

namespace {

HybridTimeDomain random_domain(std::mt19937& rng) {
  std::uniform_int_distribution<int> jumps(0, 4);
  std::uniform_real_distribution<double> gap(0.0, 1.0);
  std::vector<double> times{0.0};
  const int J = jumps(rng);
  for (int j = 0; j <= J; ++j) times.push_back(times.back() + gap(rng));
  return HybridTimeDomain(times);
}

}  // namespace

TEST_CASE("truncate then concatenate the removed tail reproduces the domain") {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    const HybridTimeDomain dom = random_domain(rng);
    // Pick a contained hybrid time on a random level.
    std::uniform_int_distribution<int> level(0, dom.jump_count());
    const int j = level(rng);
    const double a = dom.interval_start(j);
    const double b = dom.interval_end(j);
    const HybridTime ht{a + unit(rng) * (b - a), j};

    const HybridTimeDomain head = dom.truncate(ht);
    // Tail domain re-clocked to zero.
    std::vector<double> tail{0.0};
    for (int k = j; k <= dom.jump_count(); ++k) {
      tail.push_back(std::max(dom.interval_end(k) - ht.t, 0.0));
    }
    const HybridTimeDomain rebuilt =
        head.concatenate(HybridTimeDomain(tail));
    CHECK(rebuilt.approx_equal(dom, 1e-9));
  }
}

TEST_CASE("concatenation is associative") {
  std::mt19937 rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const HybridTimeDomain a = random_domain(rng);
    const HybridTimeDomain b = random_domain(rng);
    const HybridTimeDomain c = random_domain(rng);
    CHECK(a.concatenate(b).concatenate(c).approx_equal(
        a.concatenate(b.concatenate(c)), 1e-9));
  }
}

TEST_CASE("containment of truncations matches the t + j order") {
  const HybridTimeDomain dom({0.0, 0.5, 1.0, 1.0, 2.0});
  const HybridTime cut{1.0, 1};
  const HybridTimeDomain head = dom.truncate(cut);
  for (int j = 0; j <= dom.jump_count(); ++j) {
    for (double frac : {0.0, 0.3, 1.0}) {
      const double t = dom.interval_start(j) +
                       frac * (dom.interval_end(j) - dom.interval_start(j));
      const HybridTime ht{t, j};
      const bool expected = ht.j <= cut.j && ht.t <= cut.t + hmpc::kTimeTol;
      CHECK(head.contains(ht) == expected);
    }
  }
}
