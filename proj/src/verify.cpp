#include "hmpc/verify.hpp"

#include <cmath>
#include <random>
#include <sstream>
#include <stdexcept>

namespace hmpc {
namespace {

/// Slack for the exact-arithmetic comparisons; absorbs rounding in the cost
/// and distance evaluations without hiding real violations.
constexpr double kExactTol = 1e-12;

void split_xu(const HybridPlant& plant, const Eigen::VectorXd& point, State& x,
              Input& u) {
  x = point.head(plant.state_dim);
  u = point.tail(plant.input_dim);
}

}  // namespace

Witness power_witness(double a, double p) {
  if (a <= 0.0 || p <= 0.0) {
    throw std::invalid_argument("power witness needs a > 0 and p > 0");
  }
  return {[a, p](double r) { return a * std::pow(r, p); }};
}

void validate_class_k(const Witness& w, double r_max, int grid_points) {
  if (!(r_max > 0.0) || grid_points < 2) {
    throw std::invalid_argument("class-K validation needs r_max > 0 and a grid");
  }
  if (std::abs(w(0.0)) > kExactTol) {
    throw std::invalid_argument("class-K candidate is nonzero at zero");
  }
  double prev = w(0.0);
  for (int i = 1; i < grid_points; ++i) {
    const double r = r_max * static_cast<double>(i) /
                     static_cast<double>(grid_points - 1);
    const double value = w(r);
    if (!(value > prev)) {
      throw std::invalid_argument(
          "class-K candidate is not strictly increasing on the grid");
    }
    prev = value;
  }
}

std::vector<Eigen::VectorXd> SampleCloud::draw(
    const std::function<bool(const Eigen::VectorXd&)>& accept) const {
  if (lo.size() != hi.size()) {
    throw std::invalid_argument("sample box bounds have mismatched sizes");
  }
  for (Eigen::Index i = 0; i < lo.size(); ++i) {
    if (hi(i) < lo(i)) {
      throw std::invalid_argument("sample box has hi < lo");
    }
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<Eigen::VectorXd> samples;
  samples.reserve(static_cast<std::size_t>(count));
  const long long max_attempts = 10000LL * static_cast<long long>(count);
  long long attempts = 0;
  Eigen::VectorXd point(lo.size());
  while (static_cast<int>(samples.size()) < count) {
    if (++attempts > max_attempts) {
      throw std::runtime_error(
          "rejection sampling acceptance rate too low; tighten the region");
    }
    for (Eigen::Index i = 0; i < lo.size(); ++i) {
      point(i) = lo(i) + unit(rng) * (hi(i) - lo(i));
    }
    if (!accept || accept(point)) samples.push_back(point);
  }
  return samples;
}

std::string CheckReport::summary() const {
  std::ostringstream os;
  if (violations.empty()) {
    os << "no violation found among " << samples_checked << " samples";
  } else {
    os << violations.size() << " violation(s) among " << samples_checked
       << " samples; first: " << violations.front().inequality << " lhs "
       << violations.front().lhs << " vs rhs " << violations.front().rhs;
  }
  return os.str();
}

State fd_gradient(const std::function<double(const State&)>& phi,
                  const State& x, double step) {
  State grad(x.size());
  State probe = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    probe(i) = x(i) + step;
    const double hi_value = phi(probe);
    probe(i) = x(i) - step;
    const double lo_value = phi(probe);
    probe(i) = x(i);
    grad(i) = (hi_value - lo_value) / (2.0 * step);
  }
  return grad;
}

CheckReport check_stage_bounds(const HybridPlant& plant, const CostSpec& spec,
                               const TargetSet& A, const Witness& witness_C,
                               const Witness& witness_D,
                               const SampleCloud& cloud_C,
                               const SampleCloud& cloud_D) {
  CheckReport report;
  State x;
  Input u;
  const auto in_C = [&](const Eigen::VectorXd& point) {
    State xs;
    Input us;
    split_xu(plant, point, xs, us);
    return plant.in_flow_set(xs, us);
  };
  for (const Eigen::VectorXd& point : cloud_C.draw(in_C)) {
    split_xu(plant, point, x, u);
    const double lhs = spec.L_C(x, u);
    const double rhs = witness_C(A.distance(x));
    ++report.samples_checked;
    if (lhs < rhs - kExactTol) {
      report.violations.push_back({point, lhs, rhs, "flow stage lower bound"});
    }
  }
  const auto in_D = [&](const Eigen::VectorXd& point) {
    State xs;
    Input us;
    split_xu(plant, point, xs, us);
    return plant.in_jump_set(xs, us);
  };
  for (const Eigen::VectorXd& point : cloud_D.draw(in_D)) {
    split_xu(plant, point, x, u);
    const double lhs = spec.L_D(x, u);
    const double rhs = witness_D(A.distance(x));
    ++report.samples_checked;
    if (lhs < rhs - kExactTol) {
      report.violations.push_back({point, lhs, rhs, "jump stage lower bound"});
    }
  }
  return report;
}

CheckReport check_terminal_bound(const CostSpec& spec, const TargetSet& A,
                                 const Witness& witness_alpha, double epsilon,
                                 const SampleCloud& cloud) {
  if (!(epsilon > 0.0)) {
    throw std::invalid_argument("terminal bound needs epsilon > 0");
  }
  CheckReport report;
  const auto accept = [&](const Eigen::VectorXd& x) {
    return spec.in_X(x) && A.distance(x) <= epsilon;
  };
  for (const Eigen::VectorXd& x : cloud.draw(accept)) {
    const double lhs = spec.V(x);
    const double rhs = witness_alpha(A.distance(x));
    ++report.samples_checked;
    if (lhs > rhs + kExactTol) {
      report.violations.push_back({x, lhs, rhs, "terminal upper bound"});
    }
  }
  return report;
}

CheckReport check_clf(const HybridPlant& plant, const CostSpec& spec,
                      const Feedback& fb,
                      const std::function<bool(const State&)>& in_X,
                      const SampleCloud& cloud_flow,
                      const SampleCloud& cloud_jump, double fd_step) {
  if (!(fd_step > 0.0)) {
    throw std::invalid_argument("finite-difference step must be positive");
  }
  CheckReport report;
  const double flow_tol = 1e-6 + 10.0 * fd_step * fd_step;

  const auto in_flow = [&](const State& x) {
    return in_X(x) && plant.in_flow_set(x, fb.kappa_C(x));
  };
  for (const State& x : cloud_flow.draw(in_flow)) {
    const Input u = fb.kappa_C(x);
    const State grad = fd_gradient(spec.V, x, fd_step);
    const double lhs = grad.dot(plant.flow_map(x, u)) + spec.L_C(x, u);
    ++report.samples_checked;
    if (lhs > flow_tol) {
      report.violations.push_back({x, lhs, 0.0, "flow descent"});
    }
  }

  const auto in_jump = [&](const State& x) {
    return in_X(x) && plant.in_jump_set(x, fb.kappa_D(x));
  };
  for (const State& x : cloud_jump.draw(in_jump)) {
    const Input u = fb.kappa_D(x);
    const double lhs =
        spec.V(plant.jump_map(x, u)) - spec.V(x) + spec.L_D(x, u);
    ++report.samples_checked;
    if (lhs > 1e-9) {
      report.violations.push_back({x, lhs, 0.0, "jump descent"});
    }
  }
  return report;
}

PdReport check_pd_conditions(const HybridPlant& plant, const TargetSet& A,
                             const std::vector<SolutionPair>& sols,
                             const Witness& alpha_witness, const Witness& sigma,
                             const SampleCloud& cloud_flow) {
  PdReport report;
  for (const SolutionPair& sol : sols) {
    PdSolutionResult result;
    const double d0 = A.distance(sol.initial_state());
    if (d0 <= kExactTol) {
      // Initial state on the target: all lower bounds hold vacuously.
      report.solutions.push_back({true, true, true, true});
      continue;
    }
    const double thr = alpha_witness(d0);

    // Ordered trajectory nodes (t, j, distance) across all flow intervals.
    struct Node {
      double t;
      int j;
      double dist;
    };
    std::vector<Node> nodes;
    for (int j = 0; j <= sol.dom.jump_count(); ++j) {
      const FlowArc& arc = sol.arcs[static_cast<std::size_t>(j)];
      for (std::size_t k = 0; k < arc.t.size(); ++k) {
        nodes.push_back({arc.t[k], j, A.distance(arc.x[k])});
      }
    }

    result.p4 = A.distance(sol.terminal_state()) >= thr - kExactTol;
    for (int j = 0; j < sol.dom.jump_count(); ++j) {
      const FlowArc& arc = sol.arcs[static_cast<std::size_t>(j)];
      if (A.distance(arc.x.back()) >= thr - kExactTol) {
        result.p3 = true;
        break;
      }
    }

    // Longest contiguous stretch with distance >= threshold; P1 measures its
    // hybrid-time length, P2 its ordinary-time length.
    std::size_t start = 0;
    while (start < nodes.size()) {
      while (start < nodes.size() && nodes[start].dist < thr - kExactTol) {
        ++start;
      }
      std::size_t end = start;
      while (end + 1 < nodes.size() && nodes[end + 1].dist >= thr - kExactTol) {
        ++end;
      }
      if (start < nodes.size()) {
        const double dt = nodes[end].t - nodes[start].t;
        const double dj = static_cast<double>(nodes[end].j - nodes[start].j);
        if (dt + dj >= thr - kExactTol) result.p1 = true;
        if (dt >= thr - kExactTol) result.p2 = true;
      }
      start = end + 1;
    }
    report.solutions.push_back(result);
  }

  // Velocity bound |f(x, u)| <= sigma(|x|_A) on flow-set samples off the
  // target set.
  State x;
  Input u;
  const auto accept = [&](const Eigen::VectorXd& point) {
    State xs;
    Input us;
    split_xu(plant, point, xs, us);
    return plant.in_flow_set(xs, us) && A.distance(xs) > kExactTol;
  };
  for (const Eigen::VectorXd& point : cloud_flow.draw(accept)) {
    split_xu(plant, point, x, u);
    const double lhs = plant.flow_map(x, u).norm();
    const double rhs = sigma(A.distance(x));
    ++report.velocity.samples_checked;
    if (lhs > rhs + kExactTol) {
      report.velocity.violations.push_back({point, lhs, rhs, "velocity bound"});
    }
  }
  return report;
}

std::string PdReport::summary() const {
  std::ostringstream os;
  os << solutions.size() << " solution(s): ";
  for (const PdSolutionResult& r : solutions) {
    os << "[P1=" << (r.p1 ? 'y' : 'n') << " P2=" << (r.p2 ? 'y' : 'n')
       << " P3=" << (r.p3 ? 'y' : 'n') << " P4=" << (r.p4 ? 'y' : 'n') << "] ";
  }
  os << "velocity: " << velocity.summary();
  return os.str();
}

CheckReport check_sufficient_conditions(const HybridPlant& plant, const TargetSet& A,
                        const SufficientConditionWitnesses& w, const SampleCloud& cloud_flow,
                        const SampleCloud& cloud_jump) {
  if (!(w.epsilon > 0.0)) {
    throw std::invalid_argument("epsilon must be positive");
  }
  CheckReport report;
  State x;
  Input u;

  const auto in_C_near = [&](const Eigen::VectorXd& point) {
    State xs;
    Input us;
    split_xu(plant, point, xs, us);
    return plant.in_flow_set(xs, us) && A.distance(xs) <= w.epsilon;
  };
  for (const Eigen::VectorXd& point : cloud_flow.draw(in_C_near)) {
    split_xu(plant, point, x, u);
    const double d = A.distance(x);
    const double vt = w.vtilde(x);
    ++report.samples_checked;
    if (w.alpha1(d) > vt + kExactTol) {
      report.violations.push_back({point, w.alpha1(d), vt, "sandwich lower"});
    }
    if (vt > w.alpha2(d) + kExactTol) {
      report.violations.push_back({point, vt, w.alpha2(d), "sandwich upper"});
    }
    const double rate = w.grad_vtilde(x).dot(plant.flow_map(x, u));
    if (rate < w.lambda * vt - 1e-9) {
      report.violations.push_back(
          {point, rate, w.lambda * vt, "flow rate lower bound"});
    }
    if (d > kExactTol) {
      const double speed = plant.flow_map(x, u).norm();
      if (speed > w.sigma(d) + kExactTol) {
        report.violations.push_back({point, speed, w.sigma(d), "velocity bound"});
      }
    }
  }

  const auto in_D = [&](const Eigen::VectorXd& point) {
    State xs;
    Input us;
    split_xu(plant, point, xs, us);
    return plant.in_jump_set(xs, us);
  };
  for (const Eigen::VectorXd& point : cloud_jump.draw(in_D)) {
    split_xu(plant, point, x, u);
    const double lhs = A.distance(plant.jump_map(x, u));
    const double rhs = w.alpha_D(A.distance(x));
    ++report.samples_checked;
    if (lhs < rhs - kExactTol) {
      report.violations.push_back({point, lhs, rhs, "jump distance lower bound"});
    }
  }
  return report;
}

}  // namespace hmpc
