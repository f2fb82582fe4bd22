#include "hmpc/mpc.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <sstream>

namespace hmpc {
namespace {

/// Trigger point in the predicted trajectory's own clock: the piece up to
/// this hybrid time is applied before re-optimizing.
HybridTime trigger_point(const SolutionPair& pred, const ControlHorizon& ch) {
  const HybridTimeDomain& dom = pred.dom;
  if (ch.policy == TriggerPolicy::kNextJumpOrTerminal) {
    if (dom.jump_count() > 0) {
      return {dom.interval_end(0), 1};  // just past the first predicted jump
    }
    return dom.terminal_time();
  }
  // Fixed budget: latest domain point with max((t)/delta_c, j) <= N_c.
  const double t_cap = ch.delta * static_cast<double>(ch.jumps);
  for (int j = std::min(ch.jumps, dom.jump_count()); j >= 0; --j) {
    const double t = std::min(dom.interval_end(j), t_cap);
    if (t >= dom.interval_start(j) - kTimeTol) {
      return {std::max(t, dom.interval_start(j)), j};
    }
  }
  return dom.terminal_time();
}

}  // namespace

MpcTrace run(const HybridPlant& plant, const MpcConfig& cfg, const State& x0) {
  MpcTrace trace;
  std::optional<SolutionPair> closed_loop;
  State x = x0;
  HybridTime now{0.0, 0};

  for (;;) {
    OcpSolution step = solve(plant, cfg.cost, cfg.horizon, x, cfg.ocp);
    trace.steps.push_back({now, step.cost, step.feasible, step.report.max(),
                           step.iterations, step.jump_count});
    if (!step.feasible) {
      std::ostringstream os;
      os << "optimization at (t, j) = (" << now.t << ", " << now.j
         << ") infeasible; max residual " << step.report.max();
      if (trace.steps.size() == 1) throw InfeasibleOcpError(os.str());
      if (cfg.assert_level != AssertLevel::kOff) {
        throw RecursiveFeasibilityError(os.str());
      }
      break;
    }

    const SolutionPair& pred = *step.sol;
    HybridTime cut = trigger_point(pred, cfg.control);
    // Clamp the applied piece to the remaining closed-loop budget.
    const double t_left = cfg.budget.t_max - now.t;
    const int j_left = cfg.budget.j_max - now.j;
    bool budget_hit = false;
    if (cut.j > j_left) {
      cut = {pred.dom.interval_start(j_left), j_left};
      budget_hit = true;
    }
    if (cut.t > t_left + kTimeTol) {
      int j = cut.j;
      while (j > 0 && pred.dom.interval_start(j) > t_left + kTimeTol) --j;
      cut = {t_left, j};
      budget_hit = true;
    }
    if (cut.elapsed() <= kTimeTol && !budget_hit) {
      throw RecursiveFeasibilityError(
          "control-horizon trigger does not advance hybrid time");
    }

    const SolutionPair piece = pred.truncate(cut);
    closed_loop = closed_loop ? closed_loop->concatenate(piece) : piece;
    x = closed_loop->terminal_state();
    now = closed_loop->dom.terminal_time();

    if (budget_hit || now.t >= cfg.budget.t_max - kTimeTol ||
        now.j >= cfg.budget.j_max) {
      break;
    }
  }

  if (!closed_loop) {
    throw InfeasibleOcpError("no applied segment before termination");
  }
  trace.sol = std::move(*closed_loop);
  return trace;
}

DescentReport assert_descent(const CostSpec& spec, const MpcTrace& trace,
                             double tol) {
  DescentReport report;
  for (std::size_t i = 0; i + 1 < trace.steps.size(); ++i) {
    const MpcStep& a = trace.steps[i];
    const MpcStep& b = trace.steps[i + 1];
    if (!a.feasible || !b.feasible) continue;
    const double stage = running_cost_up_to(spec, trace.sol, b.when) -
                         running_cost_up_to(spec, trace.sol, a.when);
    if (b.value > a.value - stage + tol) {
      report.violations.push_back({i, b.value, a.value - stage});
    }
  }
  return report;
}

}  // namespace hmpc
