// Acceptance gate: one pass/fail line per criterion, nonzero exit on any
// failure. Tolerances are pinned in-line; timings are wall-clock.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>
#include <sstream>
#include <vector>

#include "hmpc/models.hpp"
#include "hmpc/mpc.hpp"
#include "hmpc/ocp.hpp"
#include "hmpc/simulator.hpp"
#include "hmpc/verify.hpp"

using hmpc::Input;
using hmpc::PlantBundle;
using hmpc::State;

namespace {

int g_failures = 0;

void report(int criterion, bool pass, const std::string& detail) {
  std::printf("[%s] criterion %d: %s\n", pass ? "PASS" : "FAIL", criterion,
              detail.c_str());
  std::fflush(stdout);
  if (!pass) ++g_failures;
}

double now_minus(const std::chrono::steady_clock::time_point& t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
      .count();
}

State vec2(double a, double b) {
  State x(2);
  x << a, b;
  return x;
}

constexpr double kGamma = 9.81;
constexpr double kCstar = kGamma * 3.0;

double energy(const State& x) {
  return kGamma * x(0) + 0.5 * x(1) * x(1);
}

hmpc::MpcConfig ball_mpc_config(const PlantBundle& bundle) {
  hmpc::MpcConfig cfg{bundle.horizon,    hmpc::ControlHorizon{},
                      bundle.cost,       hmpc::SimBudget{},
                      hmpc::OcpOptions{}, hmpc::AssertLevel::kFeasibility};
  cfg.budget.t_max = 10.0;
  cfg.budget.j_max = 30;
  cfg.ocp.jump_input_lo = bundle.jump_input_lo;
  cfg.ocp.jump_input_hi = bundle.jump_input_hi;
  return cfg;
}

/// Largest |W - c*| over all states at jump level >= 1.
double post_jump_energy_error(const hmpc::SolutionPair& sol) {
  double worst = 0.0;
  for (int j = 1; j <= sol.dom.jump_count(); ++j) {
    for (const State& x : sol.arcs[static_cast<std::size_t>(j)].x) {
      worst = std::max(worst, std::abs(energy(x) - kCstar));
    }
  }
  return worst;
}

}  // namespace

int main() {
  const PlantBundle ball = hmpc::bouncing_ball();
  const hmpc::MpcConfig ball_cfg = ball_mpc_config(ball);

  // The three closed-loop reference runs feed criteria 1-5.
  std::vector<hmpc::MpcTrace> runs;
  std::vector<double> run_walls;
  for (const State& x0 : {vec2(0.0, 0.0), vec2(1.0, -1.0), vec2(3.0, 4.0)}) {
    const auto t0 = std::chrono::steady_clock::now();
    runs.push_back(hmpc::run(ball.plant, ball_cfg, x0));
    run_walls.push_back(now_minus(t0));
  }

  {  // 1: rest start jumps onto the energy level and stays there.
    const double err = post_jump_energy_error(runs[0].sol);
    const bool pass = runs[0].sol.dom.jump_count() >= 1 && err <= 1e-4 &&
                      run_walls[0] < 60.0;
    std::ostringstream os;
    os << "rest start holds W = " << kCstar << " after the first jump "
       << "(max |W - c*| = " << err << " <= 1e-4, " << run_walls[0]
       << " s < 60 s)";
    report(1, pass, os.str());
  }

  {  // 2: drop from (1, -1): impact time and dead-beat convergence.
    // jump_times() is the boundary sequence {t_0, ..., t_{J+1}}; the first
    // jump happens at its second entry.
    const auto& bounds = runs[1].sol.dom.jump_times();
    const double t1 = bounds.size() >= 3 ? bounds[1] : -1.0;
    const double err = post_jump_energy_error(runs[1].sol);
    const bool pass = t1 >= 0.0 && std::abs(t1 - 0.361) <= 0.01 &&
                      err <= 1e-4 && run_walls[1] < 60.0;
    std::ostringstream os;
    os << "first impact at t1 = " << t1 << " (0.361 +/- 0.01), dead-beat "
       << "afterward (max |W - c*| = " << err << " <= 1e-4, " << run_walls[1]
       << " s < 60 s)";
    report(2, pass, os.str());
  }

  {  // 3: high-energy start descends to the level without overshoot.
    const hmpc::SolutionPair& sol = runs[2].sol;
    bool monotone = true, no_overshoot = true;
    double prev = energy(sol.arcs.front().x.front());
    for (int j = 0; j <= sol.dom.jump_count(); ++j) {
      for (const State& x : sol.arcs[static_cast<std::size_t>(j)].x) {
        const double w = energy(x);
        if (w > prev + 1e-3) monotone = false;
        if (w < kCstar - 1e-3) no_overshoot = false;
        prev = w;
      }
    }
    const double final_err = std::abs(energy(sol.terminal_state()) - kCstar);
    const bool pass = monotone && no_overshoot && final_err <= 1e-3 &&
                      run_walls[2] < 120.0;
    std::ostringstream os;
    os << "energy nonincreasing within 1e-3 (" << (monotone ? "yes" : "no")
       << "), never below c* - 1e-3 (" << (no_overshoot ? "yes" : "no")
       << "), final |W - c*| = " << final_err << ", " << run_walls[2]
       << " s < 120 s";
    report(3, pass, os.str());
  }

  {  // 4: every re-optimization across runs 1-3 is feasible.
    std::size_t total = 0, infeasible = 0;
    for (const auto& trace : runs) {
      total += trace.steps.size();
      for (const auto& step : trace.steps) {
        if (!step.feasible) ++infeasible;
      }
    }
    std::ostringstream os;
    os << total << " re-optimizations across runs 1-3 (need >= 5), "
       << infeasible << " infeasible (need 0)";
    report(4, total >= 5 && infeasible == 0, os.str());
  }

  {  // 5: per-step value descent with tol = 5e-4.
    bool pass = true;
    std::size_t violations = 0;
    for (const auto& trace : runs) {
      const auto descent = hmpc::assert_descent(ball.cost, trace, 5e-4);
      violations += descent.violations.size();
      pass = pass && descent.ok();
    }
    std::ostringstream os;
    os << "descent check at tol 5e-4 on runs 1-3: " << violations
       << " violations (need 0)";
    report(5, pass, os.str());
  }

  {  // 6: optimal value never exceeds the terminal cost near the target.
    hmpc::OcpOptions opts;
    opts.jump_input_lo = ball.jump_input_lo;
    opts.jump_input_hi = ball.jump_input_hi;
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> height(0.0, 5.0), vel(-8.5, 8.5);
    int checked = 0, failed = 0;
    double worst_gap = -1e9;
    while (checked < 20) {
      const State x0 = vec2(height(rng), vel(rng));
      if (ball.target.distance(x0) > 2.0 || !ball.cost.in_X(x0)) continue;
      ++checked;
      const double value =
          hmpc::value(ball.plant, ball.cost, ball.horizon, x0, opts);
      const double gap = value - ball.cost.V(x0);
      worst_gap = std::max(worst_gap, gap);
      if (!(gap <= 1e-4)) ++failed;
    }
    std::ostringstream os;
    os << "J*(x0) <= V(x0) + 1e-4 for 20 sampled x0 with |x0|_target <= 2: "
       << failed << " failures, worst gap " << worst_gap;
    report(6, failed == 0, os.str());
  }

  {  // 7: sampled control-Lyapunov falsification finds nothing, 1e4 each.
    const double s = std::sqrt(2.0 * kCstar);
    Eigen::VectorXd flow_lo = vec2(0.0, -s - 0.3), flow_hi = vec2(5.0, s + 0.3);
    Eigen::VectorXd jump_lo = vec2(0.0, -s - 0.3), jump_hi = vec2(0.0, 0.0);
    const auto ball_report = hmpc::check_clf(
        ball.plant, ball.cost, ball.feedback, ball.cost.in_X,
        hmpc::SampleCloud{101, 10000, flow_lo, flow_hi},
        hmpc::SampleCloud{102, 10000, jump_lo, jump_hi}, 1e-6);

    const hmpc::SampleHoldParams sh_params =
        hmpc::SampleHoldParams::double_integrator();
    const PlantBundle sh = hmpc::sample_hold(sh_params);
    Eigen::VectorXd sh_flow_lo(4), sh_flow_hi(4), sh_jump_lo(4), sh_jump_hi(4);
    sh_flow_lo << -2.0, -2.0, -6.0, 0.0;
    sh_flow_hi << 2.0, 2.0, 6.0, sh_params.T_s;
    sh_jump_lo << -2.0, -2.0, -6.0, sh_params.T_s;
    sh_jump_hi << 2.0, 2.0, 6.0, sh_params.T_s;
    const auto sh_report = hmpc::check_clf(
        sh.plant, sh.cost, sh.feedback, sh.cost.in_X,
        hmpc::SampleCloud{103, 10000, sh_flow_lo, sh_flow_hi},
        hmpc::SampleCloud{104, 10000, sh_jump_lo, sh_jump_hi}, 1e-6);

    std::ostringstream os;
    os << "control-Lyapunov checks over 10^4 seeded samples per side: "
       << "bouncing-ball " << ball_report.violations.size()
       << " violations, sample-hold " << sh_report.violations.size()
       << " violations (need 0)";
    report(7, ball_report.ok() && sh_report.ok(), os.str());
  }

  {  // 8: solver vs exhaustive grid on a 15-instance corpus.
    const auto t0 = std::chrono::steady_clock::now();
    hmpc::OcpOptions ball_opts;
    ball_opts.jump_input_lo = ball.jump_input_lo;
    ball_opts.jump_input_hi = ball.jump_input_hi;
    const hmpc::PredictionHorizon ball_small(
        std::vector<double>{1.0, 1.0, 1.0, 0.0});
    hmpc::GridSpec grid;
    grid.input_points = 21;
    grid.duration_points = 21;
    int failed = 0, checked = 0;
    double worst = -1e9;
    for (const State& x0 :
         {vec2(0.0, 0.0), vec2(0.3, -1.0), vec2(0.6, -0.5), vec2(1.0, -2.0),
          vec2(1.5, 0.5), vec2(2.0, 1.0), vec2(2.5, -0.5), vec2(3.0, 0.0),
          vec2(0.1, -3.0), vec2(0.8, 2.0)}) {
      const double solver =
          hmpc::value(ball.plant, ball.cost, ball_small, x0, ball_opts);
      const double oracle = hmpc::brute_force_value(
          ball.plant, ball.cost, ball_small, x0, ball_opts, grid);
      ++checked;
      worst = std::max(worst, solver - oracle);
      if (!(solver <= oracle + 1e-4)) ++failed;
    }
    const hmpc::SampleHoldParams sh_params =
        hmpc::SampleHoldParams::double_integrator();
    const PlantBundle sh = hmpc::sample_hold(sh_params);
    hmpc::OcpOptions sh_opts;
    sh_opts.jump_input_lo = sh.jump_input_lo;
    sh_opts.jump_input_hi = sh.jump_input_hi;
    const hmpc::PredictionHorizon sh_small =
        hmpc::PredictionHorizon::generic(2, sh_params.T_s);
    for (double z1 : {0.3, -0.2, 0.5, -0.4, 0.1}) {
      State x0(4);
      x0 << z1, -z1, 0.0, 0.0;
      const double solver =
          hmpc::value(sh.plant, sh.cost, sh_small, x0, sh_opts);
      const double oracle = hmpc::brute_force_value(sh.plant, sh.cost,
                                                    sh_small, x0, sh_opts, grid);
      ++checked;
      worst = std::max(worst, solver - oracle);
      if (!(solver <= oracle + 1e-4)) ++failed;
    }
    const double wall = now_minus(t0);
    std::ostringstream os;
    os << "solver <= exhaustive grid + 1e-4 on " << checked
       << " instances: " << failed << " failures, worst excess " << worst
       << ", " << wall << " s < 300 s";
    report(8, failed == 0 && wall < 300.0, os.str());
  }

  {  // 9: flow physics on a 100-point grid plus bitwise determinism.
    hmpc::SimBudget numeric;
    numeric.use_closed_form = false;
    double worst_drift = 0.0, worst_event_gap = 0.0;
    const Input u0 = Input::Zero(1);
    for (int i = 0; i < 10; ++i) {
      for (int k = 0; k < 10; ++k) {
        const State x0 = vec2(0.1 + 4.9 * i / 9.0, -5.0 + 10.0 * k / 9.0);
        // Numeric flow until the impact event; energy drift along the arc.
        const auto seg = hmpc::flow_segment(
            ball.plant, x0, [&u0](double) { return u0; }, 5.0, numeric);
        const double w0 = energy(seg.arc.x.front());
        for (const State& x : seg.arc.x) {
          worst_drift = std::max(worst_drift, std::abs(energy(x) - w0));
        }
        // Closed-form impact time of the ballistic arc.
        const double t_exact =
            (x0(1) + std::sqrt(x0(1) * x0(1) + 2.0 * kGamma * x0(0))) / kGamma;
        if (seg.event_time) {
          worst_event_gap =
              std::max(worst_event_gap, std::abs(*seg.event_time - t_exact));
        } else {
          worst_event_gap = 1.0;  // the impact must be detected within 5 s
        }
      }
    }
    hmpc::SimBudget budget;
    budget.t_max = 4.0;
    budget.j_max = 6;
    const auto a = hmpc::simulate(ball.plant, vec2(2.0, 1.0), u0, budget);
    const auto b = hmpc::simulate(ball.plant, vec2(2.0, 1.0), u0, budget);
    bool identical = a.sol.dom.jump_count() == b.sol.dom.jump_count();
    for (std::size_t j = 0; identical && j < a.sol.arcs.size(); ++j) {
      const auto& aa = a.sol.arcs[j];
      const auto& bb = b.sol.arcs[j];
      identical = aa.t == bb.t;
      for (std::size_t k = 0; identical && k < aa.x.size(); ++k) {
        identical = (aa.x[k] - bb.x[k]).norm() == 0.0;
      }
    }
    std::ostringstream os;
    os << "numeric flow over a 100-point grid: max energy drift "
       << worst_drift << " <= 1e-8, max |numeric - closed-form| impact time "
       << worst_event_gap << " s <= 1e-8, reruns bitwise identical ("
       << (identical ? "yes" : "no") << ")";
    report(9, worst_drift <= 1e-8 && worst_event_gap <= 1e-8 && identical,
           os.str());
  }

  {  // 10: sampled-data double integrator closed loop.
    const hmpc::SampleHoldParams sh_params =
        hmpc::SampleHoldParams::double_integrator();
    const PlantBundle sh = hmpc::sample_hold(sh_params);
    hmpc::MpcConfig cfg{sh.horizon,        hmpc::ControlHorizon{},
                       sh.cost,           hmpc::SimBudget{},
                       hmpc::OcpOptions{}, hmpc::AssertLevel::kFeasibility};
    cfg.budget.t_max = 21.0 * sh_params.T_s;
    cfg.budget.j_max = 25;
    cfg.ocp.jump_input_lo = sh.jump_input_lo;
    cfg.ocp.jump_input_hi = sh.jump_input_hi;
    State x0(4);
    x0 << 1.0, 0.0, 0.0, 0.0;
    const auto t0 = std::chrono::steady_clock::now();
    const hmpc::MpcTrace trace = hmpc::run(sh.plant, cfg, x0);
    const double wall = now_minus(t0);

    const double deadline = 20.0 * sh_params.T_s;
    double late_z = 0.0;
    for (const auto& arc : trace.sol.arcs) {
      for (std::size_t k = 0; k < arc.t.size(); ++k) {
        if (arc.t[k] >= deadline - 1e-9) {
          late_z = std::max(late_z, arc.x[k].head(2).norm());
        }
      }
    }
    // Sampling jumps trigger the re-optimizations, so the recorded optimal
    // values are the closed-loop value function sampled at the jumps; with a
    // zero per-jump stage cost it must never increase there.
    double worst_jump_increase = -1e9;
    for (std::size_t i = 1; i < trace.steps.size(); ++i) {
      worst_jump_increase = std::max(
          worst_jump_increase, trace.steps[i].value - trace.steps[i - 1].value);
    }
    const bool pass = late_z <= 1e-2 && worst_jump_increase <= 1e-6 &&
                      wall < 120.0;
    std::ostringstream os;
    os << "|z(t)| <= 1e-2 from t = 20 T_s (max " << late_z
       << "), optimal value nonincreasing across the " << trace.steps.size()
       << " per-jump re-optimizations within 1e-6 (worst increase "
       << worst_jump_increase << "), " << wall << " s < 120 s";
    report(10, pass, os.str());
  }

  {  // 11: every long-enough domain reaches a random staircase horizon.
    std::mt19937_64 rng(7777);
    std::uniform_int_distribution<int> jumps(0, 8);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    int failed = 0;
    const int trials = 10000;
    for (int trial = 0; trial < trials; ++trial) {
      const int J = jumps(rng);
      std::vector<double> thresholds(static_cast<std::size_t>(J) + 2);
      double level = 0.0;
      for (int j = J; j >= 0; --j) {
        level += 0.05 + 3.0 * unit(rng);
        thresholds[static_cast<std::size_t>(j)] = level;
      }
      thresholds.back() = 0.0;
      const hmpc::PredictionHorizon horizon(thresholds);

      // Random domain extended until its terminal t + j exceeds t_0 + J.
      const double needed = thresholds.front() + J;
      std::vector<double> bounds{0.0};
      while (bounds.back() + static_cast<double>(bounds.size()) - 1.0 <=
             needed) {
        bounds.push_back(bounds.back() + 2.0 * unit(rng));
      }
      const hmpc::HybridTimeDomain dom(bounds);
      const auto hit = horizon.reached(dom);
      if (!hit || !horizon.contains(*hit) || !dom.contains(*hit)) {
        ++failed;
      }
    }
    std::ostringstream os;
    os << trials << " random (staircase, domain) pairs with terminal t + j > "
       << "t_0 + J: " << failed
       << " failed to intersect the horizon (need 0)";
    report(11, failed == 0, os.str());
  }

  if (g_failures == 0) {
    std::printf("acceptance: all 11 criteria passed\n");
  } else {
    std::printf("acceptance: %d criteria FAILED\n", g_failures);
  }
  return g_failures == 0 ? 0 : 1;
}
