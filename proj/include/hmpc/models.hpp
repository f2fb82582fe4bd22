#ifndef HMPC_MODELS_HPP
#define HMPC_MODELS_HPP

#include <Eigen/Dense>

#include "hmpc/costs.hpp"
#include "hmpc/horizon.hpp"
#include "hmpc/plant.hpp"

namespace hmpc {

/// A fully wired example: plant, cost data, stabilizing feedback, target set,
/// a default prediction horizon, and the input bounds the optimizer searches
/// over. Immutable after construction; every stated structural property of
/// the data is machine-verified by the factory.
struct PlantBundle {
  HybridPlant plant;
  CostSpec cost;
  Feedback feedback;
  TargetSet target;
  PredictionHorizon horizon;
  Input jump_input_lo;
  Input jump_input_hi;
};

/// Ball bouncing on a floor, controlled through velocity injections at
/// impacts; the target is the energy level set W(x) = gamma * h.
struct BouncingBallParams {
  double gamma = 9.81;   // gravity (m/s^2)
  double lambda = 0.9;   // restitution coefficient, in (0, 1]
  double h = 3.0;        // target apex height (m)
  double theta = 0.1;    // terminal-cost skew, in (0, (2/pi)(1-l^4)/(1+l^4))
  double u_max = 20.0;   // search bound for the jump input (u >= 0 in C, D)
};

PlantBundle bouncing_ball(const BouncingBallParams& params = {});

double bouncing_ball_energy(const BouncingBallParams& params, const State& x);

/// Linear plant under zero-order-hold control: state (z, eta, tau_s), the
/// held input eta is replaced at sampling events every T_s seconds.
struct SampleHoldParams {
  Eigen::MatrixXd A;
  Eigen::MatrixXd B;
  Eigen::MatrixXd K;     // held-input update eta+ = K z
  Eigen::MatrixXd P;     // terminal-cost shape matrix
  Eigen::MatrixXd Q_C;   // flow-cost weight on (z, eta)
  double sigma = 0.5;    // terminal-cost decay rate
  double T_s = 0.2;      // sampling period
  double c = 10.0;       // terminal sublevel V <= c
  double u_max = 100.0;  // input box U = [-u_max, u_max]^m

  /// Desk instance: double integrator, K = [-2, -1.5], with P solving a
  /// scaled discrete Lyapunov equation so the jump decrease condition holds
  /// with margin, and Q_C sized to satisfy the flow-cost bound.
  static SampleHoldParams double_integrator();
};

PlantBundle sample_hold(const SampleHoldParams& params);

/// Room temperature with a two-state heater; jumps toggle the heater and are
/// chosen by the input (u = 1 requests a switch). State (q, z).
struct ThermostatParams {
  double z_o = 5.0;      // outside temperature
  double z_delta = 10.0; // heater capacity
  double z_min = 9.0;
  double z_max = 11.0;
  double a_hot = 1.0;    // in (0, z_max - z_o]
  double a_cold = 1.0;
  double a_on = 0.1;
  double b_hot = 1.0;    // in (0, 1]
  double b_on_hot = 0.1;
  double b_ss = 0.1;
  double b_on_ss = 0.1;
  double b_cold = 1.0;
};

PlantBundle thermostat(const ThermostatParams& params = {});

/// Builds a named bundle ("bouncing-ball", "sample-hold", "thermostat") with
/// default parameters; throws std::invalid_argument for unknown names.
PlantBundle make_bundle(const std::string& name);

}  // namespace hmpc

#endif  // HMPC_MODELS_HPP
