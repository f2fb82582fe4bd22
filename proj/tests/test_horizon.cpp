#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>
#include <stdexcept>

#include "hmpc/horizon.hpp"

using hmpc::HybridTime;
using hmpc::HybridTimeDomain;
using hmpc::PredictionHorizon;

TEST_CASE("staircase membership, N = 5 and delta = 0.5") {
  const PredictionHorizon T = PredictionHorizon::generic(5, 0.5);
  CHECK(T.contains({2.5, 3}));
  CHECK(T.contains({1.0, 5}));
  CHECK_FALSE(T.contains({1.0, 2}));
  CHECK(T.max_jumps() == 5);
}

TEST_CASE("staircase for N = 1, delta = 1") {
  const PredictionHorizon T = PredictionHorizon::generic(1, 1.0);
  // Level 0 pins T = 1; level 1 allows any T in [0, 1].
  CHECK(T.contains({1.0, 0}));
  CHECK_FALSE(T.contains({0.5, 0}));
  CHECK(T.contains({0.0, 1}));
  CHECK(T.contains({0.7, 1}));
  CHECK_FALSE(T.contains({1.5, 1}));
}

TEST_CASE("direct threshold construction matches its interval union") {
  const PredictionHorizon T({2.0, 1.0, 0.0});  // J = 1
  CHECK(T.contains({1.5, 0}));
  CHECK(T.contains({1.0, 0}));
  CHECK(T.contains({0.5, 1}));
  CHECK_FALSE(T.contains({0.5, 0}));
  CHECK_FALSE(T.contains({1.5, 1}));
  CHECK_FALSE(T.contains({0.5, 2}));
}

TEST_CASE("threshold validation") {
  CHECK_THROWS_AS(PredictionHorizon({0.0, 0.0}), std::invalid_argument);
  CHECK_THROWS_AS(PredictionHorizon({2.0, 1.0}), std::invalid_argument);
  CHECK_THROWS_AS(PredictionHorizon({1.0, 2.0, 0.0}), std::invalid_argument);
  CHECK_THROWS_AS(PredictionHorizon::generic(0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(PredictionHorizon::band(0.0), std::invalid_argument);
}

TEST_CASE("band horizon per-level intervals") {
  SUBCASE("mu = 1.5") {
    const PredictionHorizon T = PredictionHorizon::band(1.5);
    CHECK(T.contains({1.5, 0}));
    CHECK(T.contains({2.5, 0}));
    CHECK_FALSE(T.contains({1.0, 0}));
    CHECK(T.contains({0.5, 1}));
    CHECK(T.contains({1.5, 1}));
    CHECK(T.contains({0.0, 2}));
    CHECK(T.contains({0.5, 2}));
    CHECK_FALSE(T.contains({0.75, 2}));
  }
  SUBCASE("mu = 0.5 contains (0, 1)") {
    CHECK(PredictionHorizon::band(0.5).contains({0.0, 1}));
  }
  SUBCASE("(3, 0) with mu = 1 is out") {
    CHECK_FALSE(PredictionHorizon::band(1.0).contains({3.0, 0}));
  }
}

TEST_CASE("earliest reached element of the horizon") {
  SUBCASE("domain jumping twice early reaches level 2") {
    const PredictionHorizon T = PredictionHorizon::generic(2, 1.0);
    const HybridTimeDomain dom({0.0, 0.4, 0.4, 3.0});
    const auto hit = T.reached(dom);
    REQUIRE(hit.has_value());
    CHECK(hit->t == doctest::Approx(0.4));
    CHECK(hit->j == 2);
  }
  SUBCASE("short pure flow never reaches") {
    const PredictionHorizon T = PredictionHorizon::generic(2, 1.0);
    CHECK_FALSE(T.reached(HybridTimeDomain({0.0, 0.1})).has_value());
  }
  SUBCASE("pure flow reaches level 0 at its lower threshold") {
    const PredictionHorizon T({2.0, 1.0, 0.0});
    const auto hit = T.reached(HybridTimeDomain({0.0, 2.0}));
    REQUIRE(hit.has_value());
    CHECK(hit->t == doctest::Approx(1.0));
    CHECK(hit->j == 0);
  }
  SUBCASE("flow ending exactly at the level minimum reaches it") {
    const PredictionHorizon T({2.0, 1.0, 0.0});
    const auto hit = T.reached(HybridTimeDomain({0.0, 1.0}));
    REQUIRE(hit.has_value());
    CHECK(hit->t == doctest::Approx(1.0));
    CHECK(hit->j == 0);
  }
}

TEST_CASE("constructed horizons satisfy the staircase invariants") {
  for (int N = 1; N <= 10; ++N) {
    for (double delta : {0.1, 0.5, 1.0, 1.5, 2.0}) {
      const PredictionHorizon T = PredictionHorizon::generic(N, delta);
      const auto& th = T.thresholds();
      CHECK(th.front() > 0.0);
      CHECK(th.back() == doctest::Approx(0.0));
      for (std::size_t i = 1; i < th.size(); ++i) CHECK(th[i] <= th[i - 1]);
      CHECK(T.min_elapsed() > 0.0);
    }
  }
  for (double mu : {0.3, 0.5, 1.0, 1.5, 2.7}) {
    CHECK(PredictionHorizon::band(mu).min_elapsed() > 0.0);
  }
}

TEST_CASE("domains outrunning the staircase always intersect it") {
  // Reachability property behind recursive feasibility: any domain whose
  // terminal t + j exceeds t_0 + J meets the horizon. Small deterministic
  // version here; the full 10^4-pair scan runs in the acceptance suite.
  std::mt19937 rng(3);
  std::uniform_int_distribution<int> levels(0, 5);
  std::uniform_real_distribution<double> step(0.0, 2.0);
  for (int trial = 0; trial < 500; ++trial) {
    // Random staircase.
    const int J = levels(rng);
    std::vector<double> th(static_cast<std::size_t>(J) + 2);
    th[static_cast<std::size_t>(J) + 1] = 0.0;
    double acc = step(rng) * 0.25;
    for (int j = J; j >= 0; --j) {
      acc += (j == 0) ? std::max(step(rng) * 0.5, 0.05) : step(rng) * 0.5;
      th[static_cast<std::size_t>(j)] = acc;
    }
    const PredictionHorizon T(th);

    // Random domain long enough to outrun it.
    std::vector<double> times{0.0};
    const int dom_jumps = levels(rng) + J;
    for (int j = 0; j <= dom_jumps; ++j) times.push_back(times.back() + step(rng));
    while (times.back() + dom_jumps <= th.front() + J) times.back() += 1.0;
    const HybridTimeDomain dom(times);

    CHECK(T.reached(dom).has_value());
  }
}
