#ifndef HMPC_VERIFY_HPP
#define HMPC_VERIFY_HPP

#include <functional>
#include <string>
#include <vector>

#include "hmpc/costs.hpp"
#include "hmpc/plant.hpp"

namespace hmpc {

/// Candidate class-K comparison function (monotone scalar map, zero at zero),
/// supplied by the caller; the library never synthesizes one.
struct Witness {
  std::function<double(double)> fn;
  double operator()(double r) const { return fn(r); }
};

/// The family r -> a * r^p with a > 0, p > 0.
Witness power_witness(double a, double p);

/// Checks that the candidate is zero at zero and strictly increasing on a
/// uniform grid of [0, r_max]. Throws std::invalid_argument on failure. A
/// grid check is a necessary surrogate, not a proof of monotonicity.
void validate_class_k(const Witness& w, double r_max, int grid_points = 256);

/// Deterministic sample generator: uniform draws from the box [lo, hi]
/// (degenerate coordinates lo(i) == hi(i) pin manifold dimensions), kept only
/// when they satisfy a membership predicate (rejection sampling). Identical
/// (seed, count, box) reproduce identical samples.
struct SampleCloud {
  unsigned long long seed = 0;
  int count = 1000;
  Eigen::VectorXd lo;
  Eigen::VectorXd hi;

  /// Draws `count` accepted samples. Throws std::runtime_error when the
  /// acceptance rate is too low (more than 10_000 * count attempts).
  std::vector<Eigen::VectorXd> draw(
      const std::function<bool(const Eigen::VectorXd&)>& accept) const;
};

struct Violation {
  Eigen::VectorXd point;
  double lhs = 0.0;
  double rhs = 0.0;
  std::string inequality;
};

/// Result of a sampled check. A passing report means "no violation found
/// among samples_checked samples" -- falsification evidence, not proof.
struct CheckReport {
  int samples_checked = 0;
  std::vector<Violation> violations;
  bool ok() const { return violations.empty(); }
  std::string summary() const;
};

/// Stage-cost positivity: L_C(x, u) >= alpha_C(|x|_A) on flow-set samples and
/// L_D(x, u) >= alpha_D(|x|_A) on jump-set samples. Cloud boxes span the
/// joint (x, u) vector.
CheckReport check_stage_bounds(const HybridPlant& plant, const CostSpec& spec,
                               const TargetSet& A, const Witness& witness_C,
                               const Witness& witness_D,
                               const SampleCloud& cloud_C,
                               const SampleCloud& cloud_D);

/// Terminal-cost local upper bound: V(x) <= alpha(|x|_A) on samples from the
/// terminal set within distance epsilon of the target set.
CheckReport check_terminal_bound(const CostSpec& spec, const TargetSet& A,
                                 const Witness& witness_alpha, double epsilon,
                                 const SampleCloud& cloud);

/// Control-Lyapunov inequalities for V under the feedback:
///   flow:  <grad V(x), f(x, kappa_C(x))> <= -L_C(x, kappa_C(x))
///          on X-and-closed-loop-flow-set samples, gradient by central finite
///          differences with step fd_step, tolerance 1e-6 + 10 * fd_step^2;
///   jump:  V(g(x, kappa_D(x))) - V(x) <= -L_D(x, kappa_D(x))
///          on X-and-closed-loop-jump-set samples, tolerance 1e-9.
/// Separate clouds because the two sets usually live on different manifolds.
CheckReport check_clf(const HybridPlant& plant, const CostSpec& spec,
                      const Feedback& fb,
                      const std::function<bool(const State&)>& in_X,
                      const SampleCloud& cloud_flow,
                      const SampleCloud& cloud_jump, double fd_step);

/// Which of the per-solution distance lower bounds hold for a given witness:
///   P1: some hybrid-time stretch of length >= alpha(d0) (in t + j) along
///       which the distance to the target stays >= alpha(d0);
///   P2: as P1 with ordinary-time length t' - t >= alpha(d0);
///   P3: some pre-jump state at distance >= alpha(d0);
///   P4: terminal state at distance >= alpha(d0);
/// with d0 the initial distance. Checked by scanning the stored trajectory
/// nodes; degenerate initial points on the target satisfy all four vacuously.
struct PdSolutionResult {
  bool p1 = false;
  bool p2 = false;
  bool p3 = false;
  bool p4 = false;
};

struct PdReport {
  std::vector<PdSolutionResult> solutions;
  CheckReport velocity;  // |f(x, u)| <= sigma(|x|_A) on flow-set samples
  std::string summary() const;
};

PdReport check_pd_conditions(const HybridPlant& plant, const TargetSet& A,
                             const std::vector<SolutionPair>& sols,
                             const Witness& alpha_witness,
                             const Witness& sigma,
                             const SampleCloud& cloud_flow);

/// Sufficient-condition bundle for the distance lower bounds:
///   sandwich:  alpha1(|x|_A) <= Vtilde(x) <= alpha2(|x|_A)
///              on flow-set projections with |x|_A <= epsilon;
///   rate:      <grad Vtilde(x), f(x, u)> >= lambda * Vtilde(x)
///              on flow-set samples with |x|_A <= epsilon;
///   velocity:  |f(x, u)| <= sigma(|x|_A) on flow-set samples with
///              0 < |x|_A <= epsilon;
///   jump:      |g(x, u)|_A >= alpha_D(|x|_A) on jump-set samples.
struct SufficientConditionWitnesses {
  std::function<double(const State&)> vtilde;
  std::function<State(const State&)> grad_vtilde;  // analytic gradient
  Witness alpha1;
  Witness alpha2;
  double lambda = 0.0;
  double epsilon = 1.0;
  Witness sigma;
  Witness alpha_D;
};

CheckReport check_sufficient_conditions(const HybridPlant& plant, const TargetSet& A,
                        const SufficientConditionWitnesses& w, const SampleCloud& cloud_flow,
                        const SampleCloud& cloud_jump);

/// Central finite-difference gradient of a scalar field; exposed for the
/// cross-validation of check_clf against analytic gradients.
State fd_gradient(const std::function<double(const State&)>& phi,
                  const State& x, double step);

}  // namespace hmpc

#endif  // HMPC_VERIFY_HPP
