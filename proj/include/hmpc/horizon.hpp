#ifndef HMPC_HORIZON_HPP
#define HMPC_HORIZON_HPP

#include <optional>
#include <vector>

#include "hmpc/hybrid_time.hpp"

namespace hmpc {

/// Set of admissible terminal hybrid times for the optimal control problem:
/// the union of [t_{j+1}, t_j] x {j} for j = 0..J, where the thresholds
/// {t_0, ..., t_{J+1}} are nonincreasing with t_0 > 0 and t_{J+1} = 0.
///
/// Every constructor normalizes into this canonical threshold form, so a
/// single membership algorithm and validator serve all constructions.
class PredictionHorizon {
 public:
  /// Direct construction from thresholds; validates the staircase shape.
  explicit PredictionHorizon(std::vector<double> thresholds);

  /// Staircase {(T, J) : max(T/delta, J) = N}: levels j < N pin the terminal
  /// flow time to delta*N, level N allows any T in [0, delta*N].
  static PredictionHorizon generic(int N, double delta);

  /// Band {(T, J) : T + J in [mu, mu+1]}, normalized to threshold form.
  static PredictionHorizon band(double mu);

  int max_jumps() const { return static_cast<int>(thresholds_.size()) - 2; }

  /// Admissible terminal flow times at jump level j, as [lo, hi].
  double level_min_time(int j) const { return thresholds_[static_cast<std::size_t>(j) + 1]; }
  double level_max_time(int j) const { return thresholds_[static_cast<std::size_t>(j)]; }

  bool contains(const HybridTime& ht) const;

  /// Smallest elapsed hybrid time t + j over the horizon; strictly positive
  /// for every valid staircase.
  double min_elapsed() const;

  /// Earliest (in the t + j order) element of dom intersected with the
  /// horizon, or nullopt when the domain never reaches it.
  std::optional<HybridTime> reached(const HybridTimeDomain& dom) const;

  const std::vector<double>& thresholds() const { return thresholds_; }

 private:
  std::vector<double> thresholds_;
};

/// Re-optimization rule for the receding-horizon loop.
enum class TriggerPolicy {
  /// Apply the optimal input until delta_c*... budget: re-optimize once
  /// max((t - T_i)/delta_c, j - J_i) exceeds N_c.
  kFixedBudget,
  /// Re-optimize just after the predicted trajectory's next jump, or at its
  /// terminal time when the prediction never jumps.
  kNextJumpOrTerminal,
};

struct ControlHorizon {
  int jumps = 1;        // N_c
  double delta = 1.0;   // delta_c
  TriggerPolicy policy = TriggerPolicy::kNextJumpOrTerminal;
};

}  // namespace hmpc

#endif  // HMPC_HORIZON_HPP
