#include "hmpc/simulator.hpp"

#include <algorithm>
#include <cmath>

namespace hmpc {
namespace {

// Dormand-Prince 5(4) coefficients.
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                 a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                 a64 = 49.0 / 176, a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                 b5 = -2187.0 / 6784, b6 = 11.0 / 84;
constexpr double e1 = 35.0 / 384 - 5179.0 / 57600,
                 e3 = 500.0 / 1113 - 7571.0 / 16695,
                 e4 = 125.0 / 192 - 393.0 / 640,
                 e5 = -2187.0 / 6784 + 92097.0 / 339200,
                 e6 = 11.0 / 84 - 187.0 / 2100, e7 = -1.0 / 40;

State hermite(double ta, const State& xa, const State& ka, double tb,
              const State& xb, const State& kb, double t) {
  const double dt = tb - ta;
  if (dt < kTimeTol) return xa;
  const double s = std::clamp((t - ta) / dt, 0.0, 1.0);
  const double s2 = s * s, s3 = s2 * s;
  return (2 * s3 - 3 * s2 + 1) * xa + ((s3 - 2 * s2 + s) * dt) * ka +
         (-2 * s3 + 3 * s2) * xb + ((s3 - s2) * dt) * kb;
}

/// Flow dynamics plus the scalarizations the integrator needs; all functions
/// take (absolute time, state).
struct FlowProblem {
  std::function<State(double, const State&)> F;
  std::function<Input(double, const State&)> u_of;
  std::function<double(double, const State&)> guard;  // null: no events
  std::function<bool(double, const State&)> in_C;     // null: no escape check
  std::function<State(double, double)> exact;         // x(t) closed form; null
};

void push_node(FlowArc& arc, double t, const State& x, const State& k,
               const Input& u) {
  arc.t.push_back(t);
  arc.x.push_back(x);
  arc.xdot.push_back(k);
  arc.u.push_back(u);
}

/// Bisects guard(t, x(t)) = 0 over [a, b] where guard(a) > 0 >= guard(b);
/// x(t) supplied by the caller (dense output or closed form). Returns the
/// first time with guard <= 0 to within te_tol.
double bisect_event(const std::function<double(double)>& guard_at, double a,
                    double b, double te_tol) {
  for (int iter = 0; iter < 200 && b - a > te_tol; ++iter) {
    const double m = 0.5 * (a + b);
    if (guard_at(m) > 0.0) {
      a = m;
    } else {
      b = m;
    }
  }
  return b;
}

FlowSegmentResult integrate_closed_form(const FlowProblem& p, const State& x0,
                                        double t0, double t_span,
                                        const SimBudget& budget) {
  FlowArc arc;
  const double t_end = t0 + t_span;
  const double te_tol = std::max(1e-10 * t_span, 1e-14);
  push_node(arc, t0, x0, p.F(t0, x0), p.u_of(t0, x0));
  double g_prev = p.guard ? p.guard(t0, x0) : 1.0;
  bool armed = g_prev > 0.0;

  double t = t0;
  while (t < t_end - kTimeTol) {
    const double tn = std::min(t + budget.max_step, t_end);
    const State xn = p.exact(t0, tn);
    if (p.guard) {
      const double gn = p.guard(tn, xn);
      if (armed && gn <= 0.0) {
        const double te = bisect_event(
            [&](double tm) { return p.guard(tm, p.exact(t0, tm)); }, t, tn,
            te_tol);
        const State xe = p.exact(t0, te);
        push_node(arc, te, xe, p.F(te, xe), p.u_of(te, xe));
        return {std::move(arc), te};
      }
      if (gn > 0.0) armed = true;
      g_prev = gn;
    }
    if (p.in_C && !p.in_C(tn, xn)) {
      throw IntegrationError("flow left the flow set without a jump event");
    }
    push_node(arc, tn, xn, p.F(tn, xn), p.u_of(tn, xn));
    t = tn;
  }
  return {std::move(arc), std::nullopt};
}

FlowSegmentResult integrate_numeric(const FlowProblem& p, const State& x0,
                                    double t0, double t_span,
                                    const SimBudget& budget) {
  FlowArc arc;
  const double t_end = t0 + t_span;
  const double te_tol = std::max(1e-10 * t_span, 1e-14);
  double t = t0;
  State x = x0;
  State k1 = p.F(t, x);
  push_node(arc, t, x, k1, p.u_of(t, x));
  double g_prev = p.guard ? p.guard(t, x) : 1.0;
  bool armed = g_prev > 0.0;

  double h = std::min(budget.max_step, t_span);
  const int n = static_cast<int>(x.size());
  while (t < t_end - kTimeTol) {
    h = std::min(h, t_end - t);
    if (h < 1e-14) {
      throw IntegrationError("step size underflow in flow integration");
    }
    const State k2 = p.F(t + a21 * h, x + h * (a21 * k1));
    const State k3 = p.F(t + 0.3 * h, x + h * (a31 * k1 + a32 * k2));
    const State k4 = p.F(t + 0.8 * h, x + h * (a41 * k1 + a42 * k2 + a43 * k3));
    const State k5 = p.F(t + (8.0 / 9) * h,
                         x + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
    const State k6 =
        p.F(t + h, x + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
    const State xn = x + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
    const double tn = t + h;
    const State k7 = p.F(tn, xn);
    const State err =
        h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);

    double sum = 0.0;
    for (int i = 0; i < n; ++i) {
      const double sc =
          budget.atol + budget.rtol * std::max(std::abs(x[i]), std::abs(xn[i]));
      const double r = err[i] / sc;
      sum += r * r;
    }
    const double errnorm = std::sqrt(sum / std::max(n, 1));
    if (errnorm > 1.0) {
      h *= std::clamp(0.9 * std::pow(errnorm, -0.2), 0.1, 1.0);
      continue;
    }

    auto state_in_step = [&](double tm) {
      return hermite(t, x, k1, tn, xn, k7, tm);
    };
    if (p.guard) {
      const double gn = p.guard(tn, xn);
      if (armed && gn <= 0.0) {
        const double te = bisect_event(
            [&](double tm) { return p.guard(tm, state_in_step(tm)); }, t, tn,
            te_tol);
        const State xe = state_in_step(te);
        push_node(arc, te, xe, p.F(te, xe), p.u_of(te, xe));
        return {std::move(arc), te};
      }
      if (gn > 0.0) armed = true;
      g_prev = gn;
    }
    if (p.in_C && !p.in_C(tn, xn)) {
      throw IntegrationError("flow left the flow set without a jump event");
    }
    push_node(arc, tn, xn, k7, p.u_of(tn, xn));
    t = tn;
    x = xn;
    k1 = k7;
    h = std::min(h * std::clamp(0.9 * std::pow(errnorm, -0.2), 0.2, 5.0),
                 budget.max_step);
  }
  return {std::move(arc), std::nullopt};
}

FlowSegmentResult integrate_flow(const FlowProblem& p, const State& x0,
                                 double t0, double t_span,
                                 const SimBudget& budget) {
  if (t_span <= kTimeTol) {
    FlowArc arc;
    push_node(arc, t0, x0, p.F(t0, x0), p.u_of(t0, x0));
    return {std::move(arc), std::nullopt};
  }
  if (p.exact) return integrate_closed_form(p, x0, t0, t_span, budget);
  return integrate_numeric(p, x0, t0, t_span, budget);
}

}  // namespace

std::string to_string(StopReason reason) {
  switch (reason) {
    case StopReason::kTimeBudget: return "time-budget";
    case StopReason::kJumpBudget: return "jump-budget";
    case StopReason::kInputExhausted: return "input-exhausted";
    case StopReason::kNoProgress: return "no-progress";
    case StopReason::kZenoTruncated: return "Zeno-truncated";
  }
  return "unknown";
}

FlowSegmentResult flow_segment(const HybridPlant& plant, const State& x0,
                               const std::function<Input(double)>& input,
                               double t_span, const SimBudget& budget,
                               double t0, bool detect_events) {
  if (!plant.in_flow_set(x0, input(t0))) {
    throw IntegrationError("flow segment started outside the flow set");
  }
  FlowProblem p;
  p.F = [&plant, &input](double t, const State& x) {
    return plant.flow_map(x, input(t));
  };
  p.u_of = [&input](double t, const State&) { return input(t); };
  if (detect_events && plant.d_guard) {
    p.guard = [&plant, &input](double t, const State& x) {
      return plant.d_guard(x, input(t));
    };
  }
  p.in_C = [&plant, &input](double t, const State& x) {
    return plant.in_flow_set(x, input(t));
  };
  if (budget.use_closed_form && plant.flow_closed_form) {
    const Input u0 = input(t0);
    p.exact = [&plant, u0, &x0](double ts, double t) {
      return plant.flow_closed_form(x0, u0, t - ts);
    };
  }
  return integrate_flow(p, x0, t0, t_span, budget);
}

SimResult simulate(const HybridPlant& plant, const State& x0,
                   const InputPolicy& policy, const SimBudget& budget) {
  const OpenLoopInput* ol = std::get_if<OpenLoopInput>(&policy);
  const Feedback* fb = std::get_if<Feedback>(&policy);
  const Input* cu = std::get_if<Input>(&policy);

  auto u_flow = [&](const State& x, int j) -> Input {
    if (cu) return *cu;
    if (fb) return fb->kappa_C(x);
    const auto& fi = ol->flow_inputs;
    return fi[std::min<std::size_t>(static_cast<std::size_t>(j), fi.size() - 1)];
  };
  auto u_jump = [&](const State& x, int j) -> Input {
    if (cu) return *cu;
    if (fb) return fb->kappa_D(x);
    return ol->jump_inputs[static_cast<std::size_t>(j)];
  };

  State x = x0;
  double t = 0.0;
  int j = 0;

  {
    const Input uf = u_flow(x, 0);
    const bool can_flow = plant.in_flow_set(x, uf);
    const bool can_jump =
        (!ol || ol->dom.jump_count() > 0) && plant.in_jump_set(x, u_jump(x, 0));
    if (!can_flow && !can_jump) {
      throw InfeasibleStartError("initial point in neither flow nor jump set");
    }
  }

  auto start_arc = [&](const State& xs) {
    const Input uf = u_flow(xs, j);
    const State k = plant.in_flow_set(xs, uf)
                        ? plant.flow_map(xs, uf)
                        : State::Zero(plant.state_dim);
    return FlowArc::single(t, xs, k, uf);
  };

  std::vector<double> jump_times = {0.0};
  std::vector<FlowArc> arcs = {start_arc(x)};
  std::vector<Input> jump_inputs;
  std::vector<double> inter_jump;
  double last_jump_t = 0.0;
  int zeno_run = 0;

  StopReason reason = StopReason::kTimeBudget;
  for (;;) {
    // Jump decision. Open-loop inputs dictate the domain: jump exactly when
    // the current level's flow interval is used up.
    bool jump_now;
    if (ol) {
      const bool level_done = t >= ol->dom.interval_end(j) - kTimeTol;
      if (level_done && j >= ol->dom.jump_count()) {
        reason = StopReason::kInputExhausted;
        break;
      }
      jump_now = level_done;
    } else {
      jump_now = plant.in_jump_set(x, u_jump(x, j));
    }

    if (jump_now) {
      if (j >= budget.j_max) {
        reason = StopReason::kJumpBudget;
        break;
      }
      const Input uj = u_jump(x, j);
      x = plant.jump_map(x, uj);
      jump_inputs.push_back(uj);
      jump_times.push_back(t);
      ++j;
      const double gap = t - last_jump_t;
      inter_jump.push_back(gap);
      zeno_run = (j > 1 && gap < 1e-9) ? zeno_run + 1 : 0;
      last_jump_t = t;
      arcs.push_back(start_arc(x));
      if (zeno_run >= 10) {
        reason = StopReason::kZenoTruncated;
        break;
      }
      continue;
    }

    if (t >= budget.t_max - kTimeTol) {
      reason = StopReason::kTimeBudget;
      break;
    }
    const Input uf = u_flow(x, j);
    if (!plant.in_flow_set(x, uf)) {
      reason = StopReason::kNoProgress;
      break;
    }

    double span = budget.t_max - t;
    if (ol) span = std::min(span, ol->dom.interval_end(j) - t);
    // Feedback/constant policies stop flowing at guard events; open-loop
    // policies flow the full interval their domain prescribes.
    auto seg = flow_segment(
        plant, x, [&](double) { return uf; }, span, budget, t,
        /*detect_events=*/ol == nullptr);
    if (fb) {
      // Recorded inputs under feedback follow the state.
      for (std::size_t i = 0; i < seg.arc.t.size(); ++i) {
        seg.arc.u[i] = fb->kappa_C(seg.arc.x[i]);
      }
    }

    FlowArc& cur = arcs.back();
    for (std::size_t i = 0; i < seg.arc.t.size(); ++i) {
      if (i == 0 && seg.arc.t[0] <= cur.t.back() + kTimeTol) continue;
      cur.t.push_back(seg.arc.t[i]);
      cur.x.push_back(seg.arc.x[i]);
      cur.xdot.push_back(seg.arc.xdot[i]);
      cur.u.push_back(seg.arc.u[i]);
    }
    t = cur.t.back();
    x = cur.x.back();

    if (!seg.event_time && !ol && t >= budget.t_max - kTimeTol) {
      reason = StopReason::kTimeBudget;
      break;
    }
  }

  jump_times.push_back(t);
  SimResult out{SolutionPair{HybridTimeDomain(std::move(jump_times)),
                             std::move(arcs), std::move(jump_inputs)},
                reason, false};
  if (reason == StopReason::kZenoTruncated) {
    out.zeno_suspected = true;
  } else if (reason == StopReason::kJumpBudget && inter_jump.size() >= 4) {
    const std::size_t n = inter_jump.size();
    out.zeno_suspected = inter_jump[n - 1] < inter_jump[n - 3] &&
                         inter_jump[n - 1] < 0.5 * inter_jump[1] + kTimeTol;
  }
  return out;
}

}  // namespace hmpc
