#include "hmpc/ocp.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <future>
#include <thread>
#include <vector>

#include "hmpc/nelder_mead.hpp"

namespace hmpc {
namespace {

constexpr double kTieTol = 1e-9;

int worker_count(int requested, int tasks) {
  int cap = requested;
  if (cap <= 0) {
    if (const char* env = std::getenv("HMPC_THREADS")) {
      cap = std::atoi(env);
    }
  }
  if (cap <= 0) cap = static_cast<int>(std::thread::hardware_concurrency());
  if (cap <= 0) cap = 1;
  return std::min(cap, std::max(tasks, 1));
}

struct Candidate {
  std::optional<SolutionPair> sol;
  double raw_cost = std::numeric_limits<double>::infinity();
  FeasibilityReport rep;

  double penalized(double rho) const {
    const double fv = rep.flow_violation, jv = rep.jump_violation,
                 tv = rep.terminal_violation;
    return raw_cost + rho * (fv * fv + jv * jv + tv * tv);
  }
};

/// Finite-dimensional transcription of one jump-count level: the decision
/// layout, its box, and the candidate builder mapping decisions to a
/// trajectory with constraint residuals.
struct LevelProblem {
  const HybridPlant* plant;
  const CostSpec* spec;
  const OcpOptions* opts;
  State x0;
  int level;          // jump count J'
  double lo_T, hi_T;  // admissible terminal flow time at this level
  bool free_T;
  bool input_chosen;
  int m;              // input dimension
  bool jump_vars;     // jump inputs are genuine decisions (box not a point)

  int dims() const {
    if (input_chosen) {
      return (level + 1) + (jump_vars ? level * m : 0);
    }
    return level * m + (free_T ? 1 : 0);
  }

  Eigen::VectorXd lower() const { return bound(false); }
  Eigen::VectorXd upper() const { return bound(true); }

  Eigen::VectorXd bound(bool hi) const {
    Eigen::VectorXd b(dims());
    int k = 0;
    if (input_chosen) {
      for (int j = 0; j <= level; ++j) b[k++] = hi ? hi_T : 0.0;
    }
    if (!input_chosen || jump_vars) {
      for (int j = 0; j < level; ++j) {
        for (int d = 0; d < m; ++d) {
          b[k++] = hi ? opts->jump_input_hi[d] : opts->jump_input_lo[d];
        }
      }
    }
    if (!input_chosen && free_T) b[k++] = hi ? hi_T : lo_T;
    return b;
  }

  Input jump_input(const Eigen::VectorXd& z, int j) const {
    if (input_chosen && !jump_vars) return opts->jump_input_lo;
    const int base = input_chosen ? (level + 1) : 0;
    return z.segment(base + j * m, m);
  }

  Candidate build(const Eigen::VectorXd& z) const;
};

/// Appends a flow-segment result to the arc under construction.
void append_segment(FlowArc& arc, const FlowArc& seg) {
  for (std::size_t i = 0; i < seg.t.size(); ++i) {
    if (i == 0 && !arc.t.empty() && seg.t[0] <= arc.t.back() + kTimeTol) {
      continue;
    }
    arc.t.push_back(seg.t[i]);
    arc.x.push_back(seg.x[i]);
    arc.xdot.push_back(seg.xdot[i]);
    arc.u.push_back(seg.u[i]);
  }
}

Candidate LevelProblem::build(const Eigen::VectorXd& z) const {
  Candidate cand;
  const Input u_flow = plant->zero_input();
  auto flow_input = [&u_flow](double) { return u_flow; };

  double t = 0.0;
  State x = x0;
  std::vector<double> jump_times = {0.0};
  std::vector<FlowArc> arcs;
  std::vector<Input> jump_inputs;
  auto open_arc = [&] {
    const State k = plant->in_flow_set(x, u_flow)
                        ? plant->flow_map(x, u_flow)
                        : State::Zero(plant->state_dim);
    arcs.push_back(FlowArc::single(t, x, k, u_flow));
  };
  open_arc();

  auto guard_excess = [&](const Input& v) {
    return plant->d_guard ? std::max(plant->d_guard(x, v), 0.0)
                          : (plant->in_jump_set(x, v) ? 0.0 : 1.0);
  };

  try {
    if (input_chosen) {
      for (int j = 0; j <= level; ++j) {
        const double dur = std::max(z[j], 0.0);
        if (dur > kTimeTol) {
          auto seg = flow_segment(*plant, x, flow_input, dur, opts->sim, t,
                                  /*detect_events=*/false);
          append_segment(arcs.back(), seg.arc);
          t = arcs.back().t.back();
          x = arcs.back().x.back();
        }
        if (j == level) break;
        const Input v = jump_input(z, j);
        if (!plant->in_jump_set(x, v)) cand.rep.jump_violation += 1.0;
        jump_inputs.push_back(v);
        jump_times.push_back(t);
        x = plant->jump_map(x, v);
        open_arc();
      }
      const double lo = lo_T, hi = hi_T;
      cand.rep.flow_violation += std::max({lo - t, t - hi, 0.0});
    } else {
      const double T_total = free_T ? std::clamp(z[dims() - 1], lo_T, hi_T)
                                    : lo_T;
      for (int j = 0; j < level; ++j) {
        const Input v = jump_input(z, j);
        if (!plant->in_jump_set(x, v)) {
          const double remaining = T_total - t;
          if (remaining > kTimeTol) {
            auto seg = flow_segment(*plant, x, flow_input, remaining,
                                    opts->sim, t, /*detect_events=*/true);
            append_segment(arcs.back(), seg.arc);
            t = arcs.back().t.back();
            x = arcs.back().x.back();
          }
          // Jump j must be reachable within the allotted flow time.
          cand.rep.flow_violation += guard_excess(v);
        }
        cand.rep.jump_violation += guard_excess(v);
        jump_inputs.push_back(v);
        jump_times.push_back(t);
        x = plant->jump_map(x, v);
        open_arc();
      }
      const double remaining = T_total - t;
      if (remaining > kTimeTol) {
        const double t_goal = t + remaining;
        auto seg = flow_segment(*plant, x, flow_input, remaining, opts->sim, t,
                                /*detect_events=*/true);
        append_segment(arcs.back(), seg.arc);
        t = arcs.back().t.back();
        x = arcs.back().x.back();
        if (seg.event_time && t < t_goal - kTimeTol) {
          // Guard fired before the terminal time: the requested duration
          // would flow out of the flow set.
          cand.rep.flow_violation += t_goal - t;
        }
      }
    }
  } catch (const SimulationError&) {
    cand.rep.flow_violation += 1e6;
    return cand;
  }

  if (spec->x_guard) {
    cand.rep.terminal_violation += std::max(spec->x_guard(x), 0.0);
  } else if (!spec->in_X(x)) {
    cand.rep.terminal_violation += 1.0;
  }

  jump_times.push_back(t);
  SolutionPair sol{HybridTimeDomain(std::move(jump_times)), std::move(arcs),
                   std::move(jump_inputs)};
  cand.raw_cost =
      running_cost_up_to(*spec, sol, sol.dom.terminal_time()) + spec->V(x);
  cand.sol = std::move(sol);
  return cand;
}

struct LevelResult {
  Candidate cand;
  int iterations = 0;
  Eigen::VectorXd decisions;
};

std::vector<Eigen::VectorXd> seeds_for(const Eigen::VectorXd& lo,
                                       const Eigen::VectorXd& hi) {
  const int n = static_cast<int>(lo.size());
  std::vector<Eigen::VectorXd> seeds;
  seeds.push_back(lo);
  seeds.push_back(hi);
  seeds.push_back(0.5 * (lo + hi));
  Eigen::VectorXd alt1(n), alt2(n);
  for (int i = 0; i < n; ++i) {
    alt1[i] = (i % 2 == 0) ? lo[i] : hi[i];
    alt2[i] = (i % 2 == 0) ? hi[i] : lo[i];
  }
  seeds.push_back(alt1);
  seeds.push_back(alt2);
  return seeds;
}

LevelResult solve_level(const LevelProblem& prob) {
  LevelResult res;
  const int n = prob.dims();
  if (n == 0) {
    res.cand = prob.build(Eigen::VectorXd());
    res.decisions = Eigen::VectorXd();
    return res;
  }
  const Eigen::VectorXd lo = prob.lower(), hi = prob.upper();
  auto clamp_box = [&](const Eigen::VectorXd& z) {
    return z.cwiseMax(lo).cwiseMin(hi).eval();
  };

  NelderMeadOptions nm;
  nm.max_iters = prob.opts->max_iters;
  nm.f_tol = 1e-13;
  nm.x_tol = 1e-12;
  const Eigen::VectorXd steps = 0.1 * (hi - lo).cwiseMax(1e-3);

  Eigen::VectorXd best_z;
  double best_pen = std::numeric_limits<double>::infinity();
  double rho = 10.0;
  for (int round = 0; round < prob.opts->penalty_rounds; ++round) {
    auto objective = [&](const Eigen::VectorXd& z) {
      return prob.build(clamp_box(z)).penalized(rho);
    };
    std::vector<Eigen::VectorXd> starts = seeds_for(lo, hi);
    if (best_z.size() > 0) starts.push_back(best_z);
    best_pen = std::numeric_limits<double>::infinity();
    for (const auto& s : starts) {
      const NelderMeadResult r = nelder_mead(objective, s, steps, nm);
      res.iterations += r.iterations;
      const double pen = objective(r.x);
      if (pen < best_pen) {
        best_pen = pen;
        best_z = clamp_box(r.x);
      }
    }
    const Candidate c = prob.build(best_z);
    if (c.rep.max() <= prob.opts->feas_tol) break;
    rho *= 10.0;
  }
  res.cand = prob.build(best_z);
  res.decisions = best_z;
  return res;
}

LevelProblem make_level(const HybridPlant& plant, const CostSpec& spec,
                        const PredictionHorizon& horizon, const State& x0,
                        const OcpOptions& opts, int level) {
  LevelProblem prob;
  prob.plant = &plant;
  prob.spec = &spec;
  prob.opts = &opts;
  prob.x0 = x0;
  prob.level = level;
  prob.lo_T = horizon.level_min_time(level);
  prob.hi_T = horizon.level_max_time(level);
  prob.free_T = prob.hi_T - prob.lo_T > kTimeTol;
  prob.input_chosen = plant.jump_trigger == JumpTrigger::kInputChosen;
  prob.m = plant.input_dim;
  prob.jump_vars =
      (opts.jump_input_hi - opts.jump_input_lo).maxCoeff() > kTimeTol;
  return prob;
}

}  // namespace

OcpSolution solve(const HybridPlant& plant, const CostSpec& spec,
                  const PredictionHorizon& horizon, const State& x0,
                  const OcpOptions& opts) {
  const int levels = horizon.max_jumps() + 1;
  std::vector<LevelResult> results(static_cast<std::size_t>(levels));

  const int workers = worker_count(opts.threads, levels);
  if (workers <= 1) {
    for (int j = 0; j < levels; ++j) {
      results[static_cast<std::size_t>(j)] =
          solve_level(make_level(plant, spec, horizon, x0, opts, j));
    }
  } else {
    std::vector<std::future<LevelResult>> futures;
    futures.reserve(static_cast<std::size_t>(levels));
    for (int j = 0; j < levels; ++j) {
      futures.push_back(std::async(std::launch::async, [&, j] {
        return solve_level(make_level(plant, spec, horizon, x0, opts, j));
      }));
    }
    for (int j = 0; j < levels; ++j) {
      results[static_cast<std::size_t>(j)] = futures[static_cast<std::size_t>(j)].get();
    }
  }

  // Ordered reduction: feasible beats infeasible; then strictly smaller
  // cost; ties within 1e-9 resolve to the smaller jump count (the ascending
  // scan keeps the incumbent).
  OcpSolution out;
  double best_infeasible_pen = std::numeric_limits<double>::infinity();
  for (int j = 0; j < levels; ++j) {
    const LevelResult& r = results[static_cast<std::size_t>(j)];
    out.iterations += r.iterations;
    const bool feas = r.cand.rep.max() <= opts.feas_tol;
    if (feas) {
      if (!out.feasible || r.cand.raw_cost < out.cost - kTieTol) {
        out.feasible = true;
        out.cost = r.cand.raw_cost;
        out.jump_count = j;
        out.sol = r.cand.sol;
        out.report = r.cand.rep;
        out.decisions = r.decisions;
      }
    } else if (!out.feasible) {
      const double pen = r.cand.penalized(1e7);
      if (pen < best_infeasible_pen) {
        best_infeasible_pen = pen;
        out.cost = r.cand.raw_cost;
        out.jump_count = j;
        out.sol = r.cand.sol;
        out.report = r.cand.rep;
        out.decisions = r.decisions;
      }
    }
  }
  return out;
}

double value(const HybridPlant& plant, const CostSpec& spec,
             const PredictionHorizon& horizon, const State& x0,
             const OcpOptions& opts) {
  const OcpSolution s = solve(plant, spec, horizon, x0, opts);
  return s.feasible ? s.cost : std::numeric_limits<double>::infinity();
}

double brute_force_value(const HybridPlant& plant, const CostSpec& spec,
                         const PredictionHorizon& horizon, const State& x0,
                         const OcpOptions& opts, const GridSpec& grid) {
  if (horizon.max_jumps() > 2) {
    throw std::invalid_argument(
        "brute-force oracle limited to horizons with at most 2 jumps");
  }
  if (grid.input_points < 1 || grid.input_points > 50 ||
      grid.duration_points < 1 || grid.duration_points > 50) {
    throw std::invalid_argument("brute-force grids limited to 1..50 points");
  }

  double best = std::numeric_limits<double>::infinity();
  for (int level = 0; level <= horizon.max_jumps(); ++level) {
    const LevelProblem prob =
        make_level(plant, spec, horizon, x0, opts, level);
    const int n = prob.dims();
    if (n == 0) {
      const Candidate c = prob.build(Eigen::VectorXd());
      if (c.rep.max() <= opts.feas_tol) best = std::min(best, c.raw_cost);
      continue;
    }
    const Eigen::VectorXd lo = prob.lower(), hi = prob.upper();
    // Durations come first in the input-chosen layout; everything after the
    // duration block is an input variable.
    const int dur_vars = prob.input_chosen ? prob.level + 1 : (prob.free_T ? 1 : 0);
    auto points_for = [&](int i) {
      const bool is_dur = prob.input_chosen ? i < dur_vars
                                            : i >= n - dur_vars;
      return is_dur ? grid.duration_points : grid.input_points;
    };
    std::vector<int> idx(static_cast<std::size_t>(n), 0);
    Eigen::VectorXd z(n);
    for (;;) {
      for (int i = 0; i < n; ++i) {
        const int pts = points_for(i);
        z[i] = pts == 1 ? lo[i]
                        : lo[i] + (hi[i] - lo[i]) * idx[static_cast<std::size_t>(i)] /
                                      (pts - 1);
      }
      const Candidate c = prob.build(z);
      if (c.rep.max() <= opts.feas_tol) best = std::min(best, c.raw_cost);
      int i = 0;
      for (; i < n; ++i) {
        if (++idx[static_cast<std::size_t>(i)] < points_for(i)) break;
        idx[static_cast<std::size_t>(i)] = 0;
      }
      if (i == n) break;
    }
  }
  return best;
}

}  // namespace hmpc
