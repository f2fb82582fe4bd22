#ifndef HMPC_COSTS_HPP
#define HMPC_COSTS_HPP

#include <functional>
#include <stdexcept>

#include "hmpc/plant.hpp"

namespace hmpc {

/// The set the controller steers to, with its exact distance |x|_A. Target
/// sets must ship a distance function; none is synthesized.
struct TargetSet {
  std::function<bool(const State&)> contains;
  std::function<double(const State&)> distance;
};

struct TerminalConstraintError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Stage costs, terminal cost, and terminal constraint set of the hybrid cost
/// functional: sum of flow-cost integrals over the flow intervals, jump costs
/// over the jumps, and the terminal cost at the final state.
struct CostSpec {
  std::function<double(const State&, const Input&)> L_C;  // flow cost rate
  std::function<double(const State&, const Input&)> L_D;  // per-jump cost
  std::function<double(const State&)> V;                  // terminal cost
  std::function<bool(const State&)> in_X;                 // terminal set
  std::function<double(const State&)> x_guard;  // signed surrogate, optional
  double quadrature_tol = 1e-9;
  /// Set when L_C is constant along every flow of the plant (bouncing ball:
  /// the flow cost depends on the state only through the flow-invariant
  /// energy); the flow integral is then the exact product rate * duration.
  bool flow_cost_invariant = false;
};

/// Total cost of a solution pair: flow integrals (adaptive quadrature to
/// quadrature_tol per interval) + jump costs + terminal cost. Throws
/// TerminalConstraintError when the terminal state is outside X.
double evaluate_cost(const CostSpec& spec, const SolutionPair& sol);

/// Accumulated stage cost (no terminal term) of the truncation up to ht.
/// Nondecreasing in the t + j order.
double running_cost_up_to(const CostSpec& spec, const SolutionPair& sol,
                          const HybridTime& ht);

}  // namespace hmpc

#endif  // HMPC_COSTS_HPP
