#ifndef HMPC_OCP_HPP
#define HMPC_OCP_HPP

#include <limits>
#include <optional>

#include "hmpc/costs.hpp"
#include "hmpc/horizon.hpp"
#include "hmpc/plant.hpp"
#include "hmpc/simulator.hpp"

namespace hmpc {

struct OcpOptions {
  double feas_tol = 1e-6;
  int max_iters = 300;       // inner-solver iterations per penalty round
  int penalty_rounds = 6;    // penalty weight continuation, x10 per round
  Input jump_input_lo;       // search box for jump-input decisions
  Input jump_input_hi;
  SimBudget sim;             // tolerances for candidate construction
  /// Worker cap for the per-jump-count subproblems; 0 reads HMPC_THREADS,
  /// then falls back to the hardware count.
  int threads = 0;
};

struct FeasibilityReport {
  double flow_violation = 0.0;      // unreachable jump / flow past the guard
  double jump_violation = 0.0;      // jump attempted outside the jump set
  double terminal_violation = 0.0;  // terminal state outside X
  double max() const {
    return std::max({flow_violation, jump_violation, terminal_violation});
  }
};

struct OcpSolution {
  bool feasible = false;
  /// Best candidate found (by penalized objective when nothing is feasible).
  std::optional<SolutionPair> sol;
  double cost = std::numeric_limits<double>::infinity();
  int jump_count = -1;
  int iterations = 0;
  FeasibilityReport report;
  Eigen::VectorXd decisions;
};

/// Grid resolution for the exhaustive oracle.
struct GridSpec {
  int input_points = 21;     // per jump-input dimension, <= 50
  int duration_points = 21;  // per duration variable, <= 50
};

/// Minimizes the hybrid cost over solution pairs from x0 whose terminal
/// hybrid time lies in the horizon and terminal state in X. Jump counts are
/// enumerated over the horizon levels; each level is transcribed into a
/// finite-dimensional program over jump inputs and flow durations and solved
/// by multi-start Nelder-Mead under exterior penalties. Ties across levels
/// (costs within 1e-9) resolve to the smallest jump count.
OcpSolution solve(const HybridPlant& plant, const CostSpec& spec,
                  const PredictionHorizon& horizon, const State& x0,
                  const OcpOptions& opts);

/// Cost field of solve (infinity when infeasible).
double value(const HybridPlant& plant, const CostSpec& spec,
             const PredictionHorizon& horizon, const State& x0,
             const OcpOptions& opts);

/// Exhaustive grid minimum over the same decision space; independent oracle
/// for small instances. Throws std::invalid_argument when the instance is
/// too large (more than 2 jumps in the horizon or grids above 50 points).
double brute_force_value(const HybridPlant& plant, const CostSpec& spec,
                         const PredictionHorizon& horizon, const State& x0,
                         const OcpOptions& opts, const GridSpec& grid);

}  // namespace hmpc

#endif  // HMPC_OCP_HPP
