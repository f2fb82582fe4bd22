#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "hmpc/models.hpp"
#include "hmpc/simulator.hpp"

using hmpc::HybridPlant;
using hmpc::Input;
using hmpc::PlantBundle;
using hmpc::SimBudget;
using hmpc::State;
using hmpc::StopReason;

namespace {

State vec2(double a, double b) {
  State x(2);
  x << a, b;
  return x;
}

}  // namespace

TEST_CASE("first impact time of a thrown ball matches the quadratic root") {
  const PlantBundle bundle = hmpc::bouncing_ball();
  SimBudget budget;
  budget.t_max = 1.0;
  budget.j_max = 1;
  const auto result =
      hmpc::simulate(bundle.plant, vec2(1.0, -1.0), Input::Zero(1), budget);
  REQUIRE(result.sol.dom.jump_count() == 1);
  const double expected = (-1.0 + std::sqrt(1.0 + 2.0 * 9.81)) / 9.81;
  CHECK(result.sol.dom.interval_end(0) == doctest::Approx(expected).epsilon(1e-10));
}

TEST_CASE("the rest state is a fixed point: purely discrete evolution") {
  const PlantBundle bundle = hmpc::bouncing_ball();
  SimBudget budget;
  budget.t_max = 1.0;
  budget.j_max = 8;
  const auto result =
      hmpc::simulate(bundle.plant, vec2(0.0, 0.0), Input::Zero(1), budget);
  CHECK(result.reason == StopReason::kJumpBudget);
  CHECK(result.sol.dom.jump_count() == 8);
  CHECK(result.sol.dom.terminal_time().t == doctest::Approx(0.0));
  const State xT = result.sol.terminal_state();
  CHECK(xT.norm() == doctest::Approx(0.0));
}

TEST_CASE("held-input plant jumps exactly every sampling period") {
  const hmpc::SampleHoldParams params =
      hmpc::SampleHoldParams::double_integrator();
  const PlantBundle bundle = hmpc::sample_hold(params);
  const HybridPlant loop = hmpc::close_loop(bundle.plant, bundle.feedback);
  SimBudget budget;
  budget.t_max = 1.05;
  budget.j_max = 10;
  State x0(4);
  x0 << 1.0, 0.0, 0.0, 0.0;
  const auto result = hmpc::simulate(loop, x0, Input(), budget);
  REQUIRE(result.sol.dom.jump_count() >= 5);
  for (int j = 1; j <= result.sol.dom.jump_count(); ++j) {
    CHECK(result.sol.dom.interval_start(j) ==
          doctest::Approx(params.T_s * j).epsilon(1e-9));
  }
}

TEST_CASE("ballistic flow segment localizes the floor impact") {
  const PlantBundle bundle = hmpc::bouncing_ball();
  const Input u = Input::Zero(1);
  const auto seg = hmpc::flow_segment(
      bundle.plant, vec2(3.0, 0.0), [&u](double) { return u; }, 2.0,
      SimBudget{});
  REQUIRE(seg.event_time.has_value());
  CHECK(*seg.event_time ==
        doctest::Approx(std::sqrt(6.0 / 9.81)).epsilon(1e-9));
}

TEST_CASE("heated room relaxes exponentially toward its equilibrium") {
  const PlantBundle bundle = hmpc::thermostat();
  const Input u = Input::Zero(1);
  State x0(2);
  x0 << 1.0, 10.0;
  const auto seg = hmpc::flow_segment(
      bundle.plant, x0, [&u](double) { return u; }, 0.5, SimBudget{}, 0.0,
      false);
  const State x = seg.arc.state_at(0.5);
  CHECK(x(1) == doctest::Approx(15.0 - 5.0 * std::exp(-0.5)).epsilon(1e-9));
}

TEST_CASE("zero-duration span yields a single-node arc without event") {
  const PlantBundle bundle = hmpc::bouncing_ball();
  const Input u = Input::Zero(1);
  const auto seg = hmpc::flow_segment(
      bundle.plant, vec2(3.0, 0.0), [&u](double) { return u; }, 0.0,
      SimBudget{});
  CHECK(seg.arc.t.size() == 1);
  CHECK_FALSE(seg.event_time.has_value());
}

TEST_CASE("energy is conserved along ballistic flows") {
  const PlantBundle bundle = hmpc::bouncing_ball();
  const hmpc::BouncingBallParams params;
  SimBudget budget;
  budget.t_max = 2.0;
  budget.j_max = 3;
  budget.use_closed_form = false;
  const auto result =
      hmpc::simulate(bundle.plant, vec2(4.0, 2.0), Input::Zero(1), budget);
  for (const auto& arc : result.sol.arcs) {
    const double w0 = hmpc::bouncing_ball_energy(params, arc.x.front());
    for (const auto& x : arc.x) {
      CHECK(std::abs(hmpc::bouncing_ball_energy(params, x) - w0) <= 1e-8);
    }
  }
}

TEST_CASE("closed-form and numeric flows agree on the impact time") {
  const PlantBundle bundle = hmpc::bouncing_ball();
  for (double h0 : {0.5, 2.0, 4.5}) {
    for (double v0 : {-3.0, 0.0, 3.0}) {
      SimBudget closed, numeric;
      closed.t_max = numeric.t_max = 3.0;
      closed.j_max = numeric.j_max = 1;
      numeric.use_closed_form = false;
      const auto a =
          hmpc::simulate(bundle.plant, vec2(h0, v0), Input::Zero(1), closed);
      const auto b =
          hmpc::simulate(bundle.plant, vec2(h0, v0), Input::Zero(1), numeric);
      REQUIRE(a.sol.dom.jump_count() == 1);
      REQUIRE(b.sol.dom.jump_count() == 1);
      CHECK(std::abs(a.sol.dom.interval_end(0) - b.sol.dom.interval_end(0)) <=
            1e-8);
      CHECK(std::abs(a.sol.arcs[0].x.back()(1) - b.sol.arcs[0].x.back()(1)) <=
            1e-7);
    }
  }
}

TEST_CASE("identical runs produce bitwise-identical jump times") {
  const PlantBundle bundle = hmpc::bouncing_ball();
  SimBudget budget;
  budget.t_max = 6.0;
  budget.j_max = 10;
  const auto a =
      hmpc::simulate(bundle.plant, vec2(2.0, 1.0), Input::Zero(1), budget);
  const auto b =
      hmpc::simulate(bundle.plant, vec2(2.0, 1.0), Input::Zero(1), budget);
  REQUIRE(a.sol.dom.jump_times().size() == b.sol.dom.jump_times().size());
  for (std::size_t i = 0; i < a.sol.dom.jump_times().size(); ++i) {
    CHECK(a.sol.dom.jump_times()[i] == b.sol.dom.jump_times()[i]);
  }
}

TEST_CASE("accumulating impacts stop the run with a Zeno report") {
  const PlantBundle bundle = hmpc::bouncing_ball();
  SimBudget budget;
  budget.t_max = 20.0;
  budget.j_max = 1000;
  const auto result =
      hmpc::simulate(bundle.plant, vec2(1.0, -1.0), Input::Zero(1), budget);
  CHECK(result.reason == StopReason::kZenoTruncated);
  CHECK(result.zeno_suspected);
  // The accumulation point of the geometric impact series.
  const double t1 = (-1.0 + std::sqrt(1.0 + 2.0 * 9.81)) / 9.81;
  const double v1 = std::sqrt(1.0 + 2.0 * 9.81);
  const double zeno = t1 + (2.0 * 0.9 * v1 / 9.81) / (1.0 - 0.9);
  CHECK(result.sol.dom.terminal_time().t == doctest::Approx(zeno).epsilon(1e-6));
}

TEST_CASE("open-loop inputs dictate the hybrid time domain") {
  const PlantBundle bundle = hmpc::bouncing_ball();
  hmpc::OpenLoopInput input{hmpc::HybridTimeDomain({0.0, 0.0, 0.5}),
                            {Input::Zero(1), Input::Zero(1)},
                            {Input::Constant(1, 7.0)}};
  SimBudget budget;
  budget.t_max = 10.0;
  budget.j_max = 10;
  const auto result =
      hmpc::simulate(bundle.plant, vec2(0.0, 0.0), input, budget);
  CHECK(result.reason == StopReason::kInputExhausted);
  CHECK(result.sol.dom.jump_count() == 1);
  CHECK(result.sol.dom.terminal_time().t == doctest::Approx(0.5));
  // The commanded jump injected upward velocity 7.
  CHECK(result.sol.arcs[1].x.front()(1) == doctest::Approx(7.0));
}

TEST_CASE("a start outside both sets is rejected") {
  const PlantBundle bundle = hmpc::bouncing_ball();
  CHECK_THROWS_AS(
      hmpc::simulate(bundle.plant, vec2(-1.0, 0.0), Input::Zero(1), SimBudget{}),
      hmpc::InfeasibleStartError);
}
