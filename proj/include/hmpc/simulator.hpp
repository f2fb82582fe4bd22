#ifndef HMPC_SIMULATOR_HPP
#define HMPC_SIMULATOR_HPP

#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>

#include "hmpc/plant.hpp"

namespace hmpc {

struct SimulationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Initial point violates the membership precondition (x0, u(0,0)) in C or D.
struct InfeasibleStartError : SimulationError {
  using SimulationError::SimulationError;
};

/// Integration failure: step size underflow, missing guard, or flow leaving
/// the flow set with no jump event.
struct IntegrationError : SimulationError {
  using SimulationError::SimulationError;
};

struct SimBudget {
  double t_max = 10.0;   // ordinary-time budget (s); 0 permits jump-only runs
  int j_max = 30;        // jump budget
  double max_step = 0.05;
  double rtol = 1e-12;
  double atol = 1e-12;
  /// Prefer the plant's exact flow over numeric integration when installed.
  bool use_closed_form = true;
};

/// Open-loop hybrid input: one constant flow input per level of its domain
/// plus one input value per jump.
struct OpenLoopInput {
  HybridTimeDomain dom;
  std::vector<Input> flow_inputs;  // size J+1
  std::vector<Input> jump_inputs;  // size J
};

/// What drives the input during simulation. Open-loop inputs dictate the
/// hybrid time domain (jumps happen at their jump times); feedback and
/// constant policies jump whenever the jump set is entered.
using InputPolicy = std::variant<Input, Feedback, OpenLoopInput>;

enum class StopReason {
  kTimeBudget,
  kJumpBudget,
  kInputExhausted,
  kNoProgress,       // neither flow nor jump possible
  kZenoTruncated,    // 10 consecutive inter-jump times below 1e-9 s
};

std::string to_string(StopReason reason);

struct SimResult {
  SolutionPair sol;
  StopReason reason;
  /// Set when inter-jump times collapse (Zeno truncation fired, or the jump
  /// budget ran out while inter-jump times were still shrinking).
  bool zeno_suspected = false;
};

struct FlowSegmentResult {
  FlowArc arc;
  /// Ordinary time at which the jump guard reached zero, if it did.
  std::optional<double> event_time;
};

/// Integrates x' = f(x, u(t)) from (t0, x0) for up to t_span seconds, or
/// until the plant's jump guard crosses zero (when detect_events is set and a
/// guard is installed). The event is localized by bisection on dense output
/// to 1e-10 * t_span. Throws IntegrationError if the flow set is exited with
/// no jump event.
FlowSegmentResult flow_segment(const HybridPlant& plant, const State& x0,
                               const std::function<Input(double)>& input,
                               double t_span, const SimBudget& budget,
                               double t0 = 0.0, bool detect_events = true);

/// Generates a solution pair of the plant from x0 under the given input
/// policy, up to the hybrid-time budget. Throws InfeasibleStartError when
/// (x0, u(0,0)) lies in neither C nor D.
SimResult simulate(const HybridPlant& plant, const State& x0,
                   const InputPolicy& policy, const SimBudget& budget);

}  // namespace hmpc

#endif  // HMPC_SIMULATOR_HPP
