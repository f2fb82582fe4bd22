#ifndef HMPC_HYBRID_TIME_HPP
#define HMPC_HYBRID_TIME_HPP

#include <cstddef>
#include <vector>

namespace hmpc {

/// Absolute tolerance for comparing ordinary times. Jump times produced by
/// event detection carry floating-point noise; comparing them exactly would
/// split domains spuriously.
inline constexpr double kTimeTol = 1e-12;

/// A point (t, j) in hybrid time: t seconds of flow, j jumps.
/// The natural order of elapsed hybrid time is the scalar t + j.
struct HybridTime {
  double t = 0.0;
  int j = 0;

  double elapsed() const { return t + static_cast<double>(j); }
};

inline bool operator==(const HybridTime& a, const HybridTime& b) {
  return a.j == b.j && a.t > b.t - kTimeTol && a.t < b.t + kTimeTol;
}

/// Order by elapsed hybrid time t + j.
inline bool operator<(const HybridTime& a, const HybridTime& b) {
  return a.elapsed() < b.elapsed() - kTimeTol;
}
inline bool operator<=(const HybridTime& a, const HybridTime& b) {
  return a.elapsed() <= b.elapsed() + kTimeTol;
}

/// A compact hybrid time domain: the union of intervals [t_j, t_{j+1}] x {j}
/// for j = 0..J, represented by its nondecreasing jump-time sequence
/// {t_0, ..., t_{J+1}} with t_0 = 0.
///
/// Degenerate intervals (t_j = t_{j+1}, consecutive jumps with no flow in
/// between) are first-class.
class HybridTimeDomain {
 public:
  /// Builds a domain from its jump-time sequence. Throws std::invalid_argument
  /// if the sequence has fewer than two entries, does not start at zero, or
  /// decreases by more than kTimeTol anywhere.
  explicit HybridTimeDomain(std::vector<double> jump_times);

  /// The degenerate domain {(0, 0)}; lets aggregates holding a domain be
  /// default-constructed before assignment.
  HybridTimeDomain() : times_{0.0, 0.0} {}

  /// Single flow interval [0, duration] x {0}.
  static HybridTimeDomain flow(double duration);

  /// The degenerate domain {(0, 0)}.
  static HybridTimeDomain point();

  int jump_count() const { return static_cast<int>(times_.size()) - 2; }

  /// Flow interval of level j, as [start, end].
  double interval_start(int j) const { return times_[static_cast<std::size_t>(j)]; }
  double interval_end(int j) const { return times_[static_cast<std::size_t>(j) + 1]; }

  /// Terminal hybrid time (t_{J+1}, J); dominates every member in the
  /// t + j order.
  HybridTime terminal_time() const;

  bool contains(const HybridTime& ht) const;

  /// Domain of the truncation up to ht; its jump-time sequence is the
  /// generalized jump-time sequence {s_0, ..., s_{j+1}} with s_{j+1} = ht.t.
  /// Throws std::domain_error if ht is not contained in the domain.
  HybridTimeDomain truncate(const HybridTime& ht) const;

  /// Concatenation: the suffix is shifted by this domain's terminal time
  /// (T, J). When this domain ends mid-flow and the suffix begins with flow,
  /// the two boundary intervals fuse into one.
  HybridTimeDomain concatenate(const HybridTimeDomain& suffix) const;

  const std::vector<double>& jump_times() const { return times_; }

  bool approx_equal(const HybridTimeDomain& other, double tol = kTimeTol) const;

 private:
  std::vector<double> times_;
};

}  // namespace hmpc

#endif  // HMPC_HYBRID_TIME_HPP
