#ifndef HMPC_MPC_HPP
#define HMPC_MPC_HPP

#include <stdexcept>
#include <vector>

#include "hmpc/costs.hpp"
#include "hmpc/horizon.hpp"
#include "hmpc/ocp.hpp"

namespace hmpc {

enum class AssertLevel { kOff, kFeasibility, kFeasibilityDescent };

struct MpcConfig {
  PredictionHorizon horizon;
  ControlHorizon control;
  CostSpec cost;
  SimBudget budget;  // overall closed-loop run limits
  OcpOptions ocp;
  AssertLevel assert_level = AssertLevel::kFeasibility;
};

/// One optimization event of the receding-horizon loop.
struct MpcStep {
  HybridTime when;       // (T_i, J_i) in the closed-loop clock
  double value;          // optimal cost from the measured state
  bool feasible;
  double residual;       // max constraint residual of the step's solution
  int iterations;
  int jump_count;
};

struct MpcTrace {
  SolutionPair sol;  // closed-loop concatenation of the applied segments
  std::vector<MpcStep> steps;
};

struct InfeasibleOcpError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Feasibility was lost at a re-optimization; indicates solver failure, not a
/// property of the receding-horizon scheme.
struct RecursiveFeasibilityError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Receding-horizon loop: solve the optimal control problem from the
/// measured state, apply the optimal input until the control-horizon trigger
/// (just past the next predicted jump, or at the predicted terminal time; the
/// fixed-budget rule by configuration), re-measure, repeat until the budget.
/// The applied segment replays the stored optimal trajectory: plant and
/// prediction model coincide here, keeping the piecewise identity exact.
MpcTrace run(const HybridPlant& plant, const MpcConfig& cfg, const State& x0);

struct DescentViolation {
  std::size_t step;
  double lhs;  // value at step i+1
  double rhs;  // value at step i minus accumulated stage cost
};

struct DescentReport {
  std::vector<DescentViolation> violations;
  bool ok() const { return violations.empty(); }
};

/// Checks that the optimal value decreases by at least the accumulated stage
/// cost between consecutive optimization events, up to tol.
DescentReport assert_descent(const CostSpec& spec, const MpcTrace& trace,
                             double tol);

}  // namespace hmpc

#endif  // HMPC_MPC_HPP
