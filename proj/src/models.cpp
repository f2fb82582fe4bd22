#include "hmpc/models.hpp"

#include <unsupported/Eigen/KroneckerProduct>
#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace hmpc {
namespace {

/// Membership slack absorbing event-localization noise at set boundaries.
constexpr double kSetSlack = 1e-7;

double scalar_input(const Input& u) { return u.size() > 0 ? u[0] : 0.0; }

// ---------------------------------------------------------------------------
// Bouncing ball

double ball_energy(double gamma, const State& x) {
  return gamma * x[0] + 0.5 * x[1] * x[1];
}

/// Euclidean distance from x to the energy level set {x1 >= 0, W = cstar},
/// minimized over its velocity parameterization v -> ((cstar - v^2/2)/gamma,
/// v), v in [-sqrt(2 cstar), sqrt(2 cstar)]: coarse grid, then golden-section
/// refinement around the best bracket.
double ball_target_distance(double gamma, double cstar, const State& x) {
  const double s = std::sqrt(2.0 * cstar);
  auto dist2 = [&](double v) {
    const double x1 = (cstar - 0.5 * v * v) / gamma;
    const double d1 = x[0] - x1, d2 = x[1] - v;
    return d1 * d1 + d2 * d2;
  };
  const int n = 200;
  int best = 0;
  double best_val = dist2(-s);
  for (int i = 1; i <= n; ++i) {
    const double v = -s + 2.0 * s * i / n;
    const double val = dist2(v);
    if (val < best_val) {
      best_val = val;
      best = i;
    }
  }
  double a = -s + 2.0 * s * std::max(best - 1, 0) / n;
  double b = -s + 2.0 * s * std::min(best + 1, n) / n;
  const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c1 = b - phi * (b - a), c2 = a + phi * (b - a);
  double f1 = dist2(c1), f2 = dist2(c2);
  for (int iter = 0; iter < 80; ++iter) {
    if (f1 < f2) {
      b = c2;
      c2 = c1;
      f2 = f1;
      c1 = b - phi * (b - a);
      f1 = dist2(c1);
    } else {
      a = c1;
      c1 = c2;
      f1 = f2;
      c2 = a + phi * (b - a);
      f2 = dist2(c2);
    }
  }
  return std::sqrt(std::min(f1, f2));
}

// ---------------------------------------------------------------------------
// Sample-and-hold helpers

struct SampleHoldLayout {
  int nz, m, n;  // z dim, held-input dim, total continuous block nz + m
};

Eigen::MatrixXd flow_block(const SampleHoldParams& p) {
  const int nz = static_cast<int>(p.A.rows());
  const int m = static_cast<int>(p.B.cols());
  Eigen::MatrixXd Af = Eigen::MatrixXd::Zero(nz + m, nz + m);
  Af.topLeftCorner(nz, nz) = p.A;
  Af.topRightCorner(nz, m) = p.B;
  return Af;
}

Eigen::MatrixXd jump_block(const SampleHoldParams& p) {
  const int nz = static_cast<int>(p.A.rows());
  const int m = static_cast<int>(p.B.cols());
  Eigen::MatrixXd Ag = Eigen::MatrixXd::Zero(nz + m, nz + m);
  Ag.topLeftCorner(nz, nz).setIdentity();
  Ag.bottomLeftCorner(m, nz) = p.K;
  return Ag;
}

/// M(s) = exp(Af' (T_s - s)) P exp(Af (T_s - s)).
Eigen::MatrixXd terminal_shape(const Eigen::MatrixXd& Af,
                               const Eigen::MatrixXd& P, double T_s,
                               double s) {
  const Eigen::MatrixXd E = (Af * (T_s - s)).exp();
  return E.transpose() * P * E;
}

}  // namespace

double bouncing_ball_energy(const BouncingBallParams& params, const State& x) {
  return ball_energy(params.gamma, x);
}

PlantBundle bouncing_ball(const BouncingBallParams& params) {
  const double gamma = params.gamma, lambda = params.lambda, h = params.h,
               theta = params.theta;
  if (gamma <= 0.0 || h < 0.0 || lambda <= 0.0 || lambda > 1.0) {
    throw std::invalid_argument("bouncing ball: need gamma > 0, h >= 0, "
                                "lambda in (0, 1]");
  }
  const double l4 = std::pow(lambda, 4);
  const double theta_max = (2.0 / std::numbers::pi) * (1.0 - l4) / (1.0 + l4);
  if (theta <= 0.0 || theta >= theta_max) {
    throw std::invalid_argument("bouncing ball: theta outside (0, " +
                                std::to_string(theta_max) + ")");
  }
  const double cstar = gamma * h;
  const double s = std::sqrt(2.0 * gamma * h);  // rebound speed on the target
  const double half_pi_theta = 0.5 * std::numbers::pi * theta;

  HybridPlant plant;
  plant.name = "bouncing-ball";
  plant.state_dim = 2;
  plant.input_dim = 1;
  plant.jump_trigger = JumpTrigger::kStateForced;
  plant.flow_map = [gamma](const State& x, const Input&) {
    State dx(2);
    dx << x[1], -gamma;
    return dx;
  };
  plant.jump_map = [lambda](const State& x, const Input& u) {
    State xp(2);
    xp << 0.0, -lambda * x[1] + scalar_input(u);
    return xp;
  };
  plant.in_flow_set = [](const State& x, const Input& u) {
    return x[0] >= -kSetSlack && scalar_input(u) >= -kSetSlack;
  };
  plant.in_jump_set = [](const State& x, const Input& u) {
    return std::abs(x[0]) <= kSetSlack && x[1] <= kSetSlack &&
           scalar_input(u) >= -kSetSlack;
  };
  plant.c_guard = [](const State& x, const Input& u) {
    return std::max(-x[0], -scalar_input(u));
  };
  // Falls (x2 <= 0): distance to the floor. Rises: positive until both the
  // height and the upward velocity vanish, so the guard stays armed through
  // an apex at x1 > 0 and fires only at touchdown.
  plant.d_guard = [](const State& x, const Input&) {
    return x[1] <= 0.0 ? x[0] : std::max(x[0], x[1]);
  };
  plant.flow_closed_form = [gamma](const State& x, const Input&, double dt) {
    State xt(2);
    xt << x[0] + x[1] * dt - 0.5 * gamma * dt * dt, x[1] - gamma * dt;
    return xt;
  };

  auto W = [gamma](const State& x) { return ball_energy(gamma, x); };

  CostSpec cost;
  cost.quadrature_tol = 1e-9;
  cost.flow_cost_invariant = true;  // L_C depends on x through W only
  cost.L_C = [W, theta, gamma, cstar](const State& x, const Input&) {
    const double e = W(x) - cstar;
    return theta * gamma * e * e / (1.0 + 2.0 * W(x));
  };
  cost.L_D = [s, lambda, cstar, half_pi_theta](const State& x, const Input&) {
    const double near_branch =
        0.5 * (1.0 - half_pi_theta) * cstar * (x[1] + s) * (x[1] + s);
    if (x[1] >= -s / lambda) return near_branch;
    const double e_pre = 0.5 * x[1] * x[1] - cstar;
    const double v_post = lambda * x[1];
    const double e_post = 0.5 * v_post * v_post - cstar;
    const double far_branch = (1.0 - half_pi_theta) * e_pre * e_pre -
                              (1.0 + half_pi_theta) * e_post * e_post;
    return std::min(near_branch, far_branch);
  };
  cost.V = [W, theta, cstar](const State& x) {
    const double e = W(x) - cstar;
    return (1.0 + theta * std::atan(x[1])) * e * e;
  };
  cost.in_X = [](const State& x) { return x[0] >= -kSetSlack; };
  cost.x_guard = [](const State& x) { return -x[0]; };

  Feedback fb;
  fb.kappa_C = [](const State&) { return Input::Constant(1, 0.0); };
  fb.kappa_D = [lambda, s](const State& x) {
    return Input::Constant(1, std::max(lambda * x[1] + s, 0.0));
  };

  TargetSet target;
  target.contains = [W, cstar](const State& x) {
    return x[0] >= -kSetSlack && std::abs(W(x) - cstar) <= 1e-9;
  };
  target.distance = [gamma, cstar](const State& x) {
    return ball_target_distance(gamma, cstar, x);
  };

  return PlantBundle{std::move(plant),
                     std::move(cost),
                     std::move(fb),
                     std::move(target),
                     PredictionHorizon::generic(5, 0.5),
                     Input::Constant(1, 0.0),
                     Input::Constant(1, params.u_max)};
}

SampleHoldParams SampleHoldParams::double_integrator() {
  SampleHoldParams p;
  p.A.setZero(2, 2);
  p.A(0, 1) = 1.0;
  p.B.setZero(2, 1);
  p.B(1, 0) = 1.0;
  p.K.resize(1, 2);
  p.K << -2.0, -1.5;
  p.sigma = 0.5;
  p.T_s = 0.2;
  p.c = 10.0;
  p.u_max = 100.0;

  // P solves Ht' P Ht - P = -I for Ht = H * exp(sigma T_s / 2), so that
  // H' P H - exp(-sigma T_s) P = -exp(-sigma T_s) I: the terminal cost
  // strictly decreases at sampling jumps under eta+ = K z.
  const Eigen::MatrixXd Af = flow_block(p);
  const Eigen::MatrixXd H = (Af * p.T_s).exp() * jump_block(p);
  const Eigen::MatrixXd Ht = H * std::exp(0.5 * p.sigma * p.T_s);
  const int n = static_cast<int>(H.rows());
  Eigen::MatrixXd lhs =
      Eigen::kroneckerProduct(Ht.transpose(), Ht.transpose()).eval() -
      Eigen::MatrixXd::Identity(n * n, n * n);
  Eigen::VectorXd rhs(n * n);
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(n, n);
  for (int c = 0; c < n; ++c)
    for (int r = 0; r < n; ++r) rhs[c * n + r] = -I(r, c);
  const Eigen::VectorXd vecP = lhs.fullPivLu().solve(rhs);
  Eigen::MatrixXd P(n, n);
  for (int c = 0; c < n; ++c)
    for (int r = 0; r < n; ++r) P(r, c) = vecP[c * n + r];
  p.P = 0.5 * (P + P.transpose());

  // Q_C at half the grid minimum of the flow-cost bound, which must dominate
  // it for the flow decrease of the terminal cost to pay for the stage cost.
  double eps = std::numeric_limits<double>::infinity();
  for (int i = 0; i <= 100; ++i) {
    const double s = p.T_s * i / 100.0;
    const Eigen::MatrixXd Ms =
        p.sigma * std::exp(-p.sigma * s) * terminal_shape(Af, p.P, p.T_s, s);
    eps = std::min(
        eps, Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(Ms)
                 .eigenvalues()
                 .minCoeff());
  }
  p.Q_C = 0.5 * eps * Eigen::MatrixXd::Identity(n, n);
  return p;
}

PlantBundle sample_hold(const SampleHoldParams& params) {
  const int nz = static_cast<int>(params.A.rows());
  const int m = static_cast<int>(params.B.cols());
  const int n = nz + m;
  if (params.A.cols() != nz || params.B.rows() != nz ||
      params.K.rows() != m || params.K.cols() != nz ||
      params.P.rows() != n || params.P.cols() != n ||
      params.Q_C.rows() != n || params.Q_C.cols() != n ||
      params.sigma <= 0.0 || params.T_s <= 0.0 || params.c <= 0.0) {
    throw std::invalid_argument("sample-hold: inconsistent dimensions or "
                                "nonpositive sigma/T_s/c");
  }
  const Eigen::MatrixXd Af = flow_block(params);
  const Eigen::MatrixXd H = (Af * params.T_s).exp() * jump_block(params);
  const double sigma = params.sigma, T_s = params.T_s, c = params.c,
               u_max = params.u_max;
  const Eigen::MatrixXd P = params.P;
  const Eigen::MatrixXd Q_C = params.Q_C;
  const Eigen::MatrixXd K = params.K;

  {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es_p(P);
    if (es_p.eigenvalues().minCoeff() <= 0.0) {
      throw std::invalid_argument("sample-hold: P is not positive definite");
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es_jump(
        Eigen::MatrixXd(H.transpose() * P * H - P));
    if (es_jump.eigenvalues().maxCoeff() >= 0.0) {
      std::ostringstream os;
      os << "sample-hold: H'PH - P not negative definite (max eigenvalue "
         << es_jump.eigenvalues().maxCoeff() << ")";
      throw std::invalid_argument(os.str());
    }
    // Flow-cost bound Q_C <= sigma exp(-sigma s) M(s) and the input-box
    // implication (V <= c, tau in [0, T_s]) => K z in U, both on an s-grid.
    Eigen::MatrixXd Kt = Eigen::MatrixXd::Zero(m, n);
    Kt.leftCols(nz) = K;
    for (int i = 0; i <= 100; ++i) {
      const double s = T_s * i / 100.0;
      const Eigen::MatrixXd Ms = terminal_shape(Af, P, T_s, s);
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es_gap(
          Eigen::MatrixXd(sigma * std::exp(-sigma * s) * Ms - Q_C));
      if (es_gap.eigenvalues().minCoeff() < -1e-12) {
        throw std::invalid_argument(
            "sample-hold: Q_C exceeds the flow-cost bound at s = " +
            std::to_string(s));
      }
      const Eigen::MatrixXd G = Kt * Ms.llt().solve(Kt.transpose());
      const double kmax =
          std::sqrt(c * std::exp(sigma * s) *
                    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(G)
                        .eigenvalues()
                        .maxCoeff());
      if (kmax > u_max) {
        throw std::invalid_argument(
            "sample-hold: terminal set does not keep K z inside the input "
            "box");
      }
    }
  }

  auto in_box = [u_max](const Eigen::VectorXd& v) {
    return (v.array().abs() <= u_max + kSetSlack).all();
  };

  HybridPlant plant;
  plant.name = "sample-hold";
  plant.state_dim = n + 1;
  plant.input_dim = m;
  plant.jump_trigger = JumpTrigger::kStateForced;
  plant.flow_map = [Af, n](const State& x, const Input&) {
    State dx(n + 1);
    dx.head(n) = Af * x.head(n);
    dx[n] = 1.0;
    return dx;
  };
  plant.jump_map = [n, nz, m](const State& x, const Input& u) {
    State xp(n + 1);
    xp.head(nz) = x.head(nz);
    xp.segment(nz, m) = u;
    xp[n] = 0.0;
    return xp;
  };
  plant.in_flow_set = [n, nz, m, T_s, in_box](const State& x, const Input&) {
    return x[n] >= -kSetSlack && x[n] <= T_s + kSetSlack &&
           in_box(x.segment(nz, m));
  };
  plant.in_jump_set = [n, nz, m, T_s, in_box](const State& x, const Input& u) {
    return std::abs(x[n] - T_s) <= kSetSlack && in_box(x.segment(nz, m)) &&
           (u.size() == 0 || in_box(u));
  };
  plant.d_guard = [n, T_s](const State& x, const Input&) {
    return T_s - x[n];
  };
  plant.c_guard = [n, T_s](const State& x, const Input&) {
    return std::max(-x[n], x[n] - T_s);
  };
  plant.flow_closed_form = [Af, n](const State& x, const Input&, double dt) {
    State xt(n + 1);
    xt.head(n) = ((Af * dt).exp() * x.head(n)).eval();
    xt[n] = x[n] + dt;
    return xt;
  };

  auto V = [Af, P, sigma, T_s, n](const State& x) {
    const double tau = std::clamp(x[n], 0.0, T_s);
    const Eigen::VectorXd x1 = x.head(n);
    return std::exp(-sigma * tau) *
           (x1.dot(terminal_shape(Af, P, T_s, tau) * x1));
  };

  CostSpec cost;
  cost.quadrature_tol = 1e-9;
  cost.L_C = [Q_C, n](const State& x, const Input&) {
    const Eigen::VectorXd x1 = x.head(n);
    return x1.dot(Q_C * x1);
  };
  cost.L_D = [](const State&, const Input&) { return 0.0; };
  cost.V = V;
  cost.in_X = [V, n, T_s, c](const State& x) {
    return x[n] >= -kSetSlack && x[n] <= T_s + kSetSlack && V(x) <= c + 1e-9;
  };
  cost.x_guard = [V, n, T_s, c](const State& x) {
    return std::max({V(x) - c, -x[n], x[n] - T_s});
  };

  Feedback fb;
  fb.kappa_C = [m](const State&) { return Input::Zero(m); };
  fb.kappa_D = [K, nz](const State& x) {
    return Input(K * x.head(nz));
  };

  TargetSet target;
  target.contains = [n, T_s](const State& x) {
    return x.head(n).norm() <= 1e-9 && x[n] >= -kSetSlack &&
           x[n] <= T_s + kSetSlack;
  };
  target.distance = [n, T_s](const State& x) {
    const double dt = std::max({0.0, -x[n], x[n] - T_s});
    return std::sqrt(x.head(n).squaredNorm() + dt * dt);
  };

  return PlantBundle{std::move(plant),
                     std::move(cost),
                     std::move(fb),
                     std::move(target),
                     PredictionHorizon::generic(5, params.T_s),
                     Input::Constant(m, -params.u_max),
                     Input::Constant(m, params.u_max)};
}

PlantBundle thermostat(const ThermostatParams& p) {
  if (!(p.z_o < p.z_min && p.z_min < p.z_max &&
        p.z_max < p.z_o + p.z_delta)) {
    throw std::invalid_argument(
        "thermostat: need z_o < z_min < z_max < z_o + z_delta");
  }
  if (p.a_hot <= 0.0 || p.a_hot > p.z_max - p.z_o || p.a_cold <= 0.0 ||
      p.a_on < 0.0 || p.b_hot <= 0.0 || p.b_hot > 1.0) {
    throw std::invalid_argument("thermostat: cost weight out of range");
  }

  auto q_ok = [](double q) {
    return std::min(std::abs(q), std::abs(q - 1.0)) <= kSetSlack;
  };
  // The heater state is exact 0 or 1 along solutions; branch on its rounding.
  auto q_bit = [](double q) { return q >= 0.5 ? 1.0 : 0.0; };

  // Heater-consistent region: mode 0 may rest or cool toward z_min, mode 1
  // may rest or heat toward z_max; its complement is where a switch is due.
  auto in_Ct = [p, q_bit](const State& x) {
    return q_bit(x[0]) == 0.0 ? x[1] >= p.z_min - kSetSlack
                              : x[1] <= p.z_max + kSetSlack;
  };

  HybridPlant plant;
  plant.name = "thermostat";
  plant.state_dim = 2;
  plant.input_dim = 1;
  plant.jump_trigger = JumpTrigger::kInputChosen;
  plant.flow_map = [p, q_bit](const State& x, const Input&) {
    State dx(2);
    dx << 0.0, -x[1] + p.z_o + p.z_delta * q_bit(x[0]);
    return dx;
  };
  plant.jump_map = [q_bit](const State& x, const Input&) {
    State xp(2);
    xp << 1.0 - q_bit(x[0]), x[1];
    return xp;
  };
  plant.in_flow_set = [q_ok](const State& x, const Input& u) {
    return q_ok(x[0]) && scalar_input(u) < 0.5;
  };
  plant.in_jump_set = [q_ok](const State& x, const Input& u) {
    return q_ok(x[0]) && scalar_input(u) >= 0.5;
  };
  plant.d_guard = [](const State&, const Input& u) {
    return 0.5 - scalar_input(u);
  };
  plant.flow_closed_form = [p, q_bit](const State& x, const Input&,
                                      double dt) {
    const double zbar = p.z_o + p.z_delta * q_bit(x[0]);
    State xt(2);
    xt << q_bit(x[0]), zbar + (x[1] - zbar) * std::exp(-dt);
    return xt;
  };

  CostSpec cost;
  cost.quadrature_tol = 1e-9;
  cost.L_C = [p, q_bit](const State& x, const Input&) {
    const double z = x[1];
    if (z >= p.z_max) return p.a_hot * (z - p.z_max) + p.a_on * q_bit(x[0]);
    if (z <= p.z_min) return p.a_cold * (p.z_min - z);
    return 0.0;
  };
  cost.L_D = [p, q_bit](const State& x, const Input&) {
    const double z = x[1];
    const double off = 1.0 - q_bit(x[0]);
    if (z >= p.z_max) {
      return 0.5 * p.b_hot * (z - p.z_max) * (z - p.z_max) +
             p.b_on_hot * off;
    }
    if (z <= p.z_min) {
      return 0.5 * p.b_cold * (z - p.z_min) * (z - p.z_min);
    }
    return 0.5 * p.b_ss * (p.z_max - z) * (z - p.z_min) + p.b_on_ss * off;
  };
  cost.V = [p, q_bit](const State& x) {
    const double z = x[1];
    if (z >= p.z_max) {
      return 0.5 * (z - p.z_max) * (z - p.z_max) * (1.0 + q_bit(x[0]));
    }
    if (z <= p.z_min) {
      return 0.5 * (z - p.z_min) * (z - p.z_min) * (2.0 - q_bit(x[0]));
    }
    return 0.0;
  };
  // The terminal region is the whole state space here (mode-consistent and
  // switch-due parts together cover every (q, z)).
  cost.in_X = [q_ok](const State& x) { return q_ok(x[0]); };
  cost.x_guard = [](const State&) { return -1.0; };

  Feedback fb;
  fb.kappa_C = [in_Ct](const State& x) {
    return Input::Constant(1, in_Ct(x) ? 0.0 : 1.0);
  };
  fb.kappa_D = [in_Ct](const State& x) {
    return Input::Constant(1, in_Ct(x) ? 0.0 : 1.0);
  };

  TargetSet target;
  target.contains = [p, q_ok](const State& x) {
    return q_ok(x[0]) && x[1] >= p.z_min - kSetSlack &&
           x[1] <= p.z_max + kSetSlack;
  };
  target.distance = [p](const State& x) {
    return std::max({0.0, p.z_min - x[1], x[1] - p.z_max});
  };

  return PlantBundle{std::move(plant),
                     std::move(cost),
                     std::move(fb),
                     std::move(target),
                     PredictionHorizon::generic(2, 1.0),
                     Input::Constant(1, 1.0),
                     Input::Constant(1, 1.0)};
}

PlantBundle make_bundle(const std::string& name) {
  if (name == "bouncing-ball") return bouncing_ball();
  if (name == "sample-hold") return sample_hold(SampleHoldParams::double_integrator());
  if (name == "thermostat") return thermostat();
  throw std::invalid_argument("unknown plant: " + name);
}

}  // namespace hmpc
