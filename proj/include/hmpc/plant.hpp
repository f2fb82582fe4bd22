#ifndef HMPC_PLANT_HPP
#define HMPC_PLANT_HPP

#include <Eigen/Dense>
#include <functional>
#include <string>
#include <vector>

#include "hmpc/hybrid_time.hpp"

namespace hmpc {

using State = Eigen::VectorXd;
using Input = Eigen::VectorXd;

/// How jumps are triggered, which decides what the optimal control problem
/// treats as decision variables: state-forced jumps (guard hit during flow)
/// leave only jump inputs and the terminal flow duration free; input-chosen
/// jumps (membership in D depends on u alone) make the flow durations
/// themselves decisions.
enum class JumpTrigger { kStateForced, kInputChosen };

/// The plant tuple (C, f, D, g): flow x' = f(x, u) while (x, u) in C, jump
/// x+ = g(x, u) when (x, u) in D.
///
/// Membership predicates define the sets; the optional signed guards
/// scalarize them (set = {guard <= 0}) for event detection and for penalty
/// terms in the optimal control transcription. All function objects must be
/// pure: the library evaluates them concurrently.
struct HybridPlant {
  std::string name;
  int state_dim = 0;
  int input_dim = 0;
  JumpTrigger jump_trigger = JumpTrigger::kStateForced;

  std::function<State(const State&, const Input&)> flow_map;
  std::function<State(const State&, const Input&)> jump_map;
  std::function<bool(const State&, const Input&)> in_flow_set;
  std::function<bool(const State&, const Input&)> in_jump_set;

  /// Optional signed guards with set = {guard <= 0}; empty when not supplied.
  std::function<double(const State&, const Input&)> c_guard;
  std::function<double(const State&, const Input&)> d_guard;

  /// Optional exact flow: (x0, constant input, duration) -> state. Installed
  /// for plants with analytic flows; the simulator prefers it over numeric
  /// integration.
  std::function<State(const State&, const Input&, double)> flow_closed_form;

  Input zero_input() const { return Input::Zero(input_dim); }
};

/// Static state feedback (kappa_C during flow, kappa_D at jumps).
struct Feedback {
  std::function<Input(const State&)> kappa_C;
  std::function<Input(const State&)> kappa_D;
};

/// Dense-output arc over one flow interval: integrator nodes with states and
/// derivatives, interpolated by cubic Hermite polynomials. Node times are
/// absolute within the owning solution pair's clock. A degenerate interval is
/// an arc with a single node.
struct FlowArc {
  std::vector<double> t;
  std::vector<State> x;
  std::vector<State> xdot;
  std::vector<Input> u;

  static FlowArc single(double time, State state, State deriv, Input input);

  double start_time() const { return t.front(); }
  double end_time() const { return t.back(); }

  State state_at(double time) const;
  State deriv_at(double time) const;
  /// Inputs interpolate piecewise-linearly between nodes (the library only
  /// produces piecewise-constant or feedback-sampled inputs, for which this
  /// is exact at nodes and adequate between them).
  Input input_at(double time) const;

  /// Nodes strictly inside (time, end]; appends interpolated node at `time`
  /// first. Used by truncation/suffix extraction.
  FlowArc tail_from(double time) const;
  FlowArc head_until(double time) const;
};

/// A hybrid arc and hybrid input on one shared domain: arcs[j] covers the
/// flow interval of level j, jump_inputs[j] is the input applied at the jump
/// from level j to j+1 (the value entering the jump map).
struct SolutionPair {
  HybridTimeDomain dom;
  std::vector<FlowArc> arcs;
  std::vector<Input> jump_inputs;

  State initial_state() const { return arcs.front().x.front(); }
  State terminal_state() const { return arcs.back().x.back(); }

  State state_at(const HybridTime& ht) const;
  Input input_at(const HybridTime& ht) const;

  /// Restriction to hybrid times up to ht (same clock).
  SolutionPair truncate(const HybridTime& ht) const;

  /// Restriction to hybrid times from ht on, re-clocked to start at (0, 0).
  SolutionPair suffix_from(const HybridTime& ht) const;

  /// Appends a suffix whose initial state continues this pair's terminal
  /// state; boundary flow intervals at the same jump level fuse.
  SolutionPair concatenate(const SolutionPair& suffix) const;
};

struct ValidationIssue {
  std::string condition;  // "S0", "S1", "S2"
  HybridTime where;
  std::string detail;
};

struct ValidationReport {
  std::vector<ValidationIssue> issues;
  bool ok() const { return issues.empty(); }
};

/// Closes the loop with static feedback: returns an input-free plant with
/// data (C_kappa, f_kappa, D_kappa, g_kappa), where C_kappa = {x : (x,
/// kappa_C(x)) in C} and so on by composition.
HybridPlant close_loop(const HybridPlant& plant, const Feedback& fb);

/// Checks the solution-pair conditions: S0 (initial point in C or D), S1
/// (flow-set membership and flow-map residual along each arc, measured
/// against the dense-output derivative at segment midpoints), S2 (jump-set
/// membership and jump-map equality at every jump). Violations are reported,
/// not thrown.
ValidationReport validate_solution(const HybridPlant& plant,
                                   const SolutionPair& sol, double tol);

}  // namespace hmpc

#endif  // HMPC_PLANT_HPP
