#include "hmpc/hybrid_time.hpp"

#include <cmath>
#include <stdexcept>

namespace hmpc {

HybridTimeDomain::HybridTimeDomain(std::vector<double> jump_times)
    : times_(std::move(jump_times)) {
  if (times_.size() < 2) {
    throw std::invalid_argument("hybrid time domain needs at least {t_0, t_1}");
  }
  if (std::abs(times_.front()) > kTimeTol) {
    throw std::invalid_argument("hybrid time domain must start at t_0 = 0");
  }
  times_.front() = 0.0;
  for (std::size_t i = 1; i < times_.size(); ++i) {
    if (times_[i] < times_[i - 1] - kTimeTol) {
      throw std::invalid_argument("jump-time sequence must be nondecreasing");
    }
    if (times_[i] < times_[i - 1]) times_[i] = times_[i - 1];
  }
}

HybridTimeDomain HybridTimeDomain::flow(double duration) {
  return HybridTimeDomain({0.0, duration});
}

HybridTimeDomain HybridTimeDomain::point() {
  return HybridTimeDomain({0.0, 0.0});
}

HybridTime HybridTimeDomain::terminal_time() const {
  return {times_.back(), jump_count()};
}

bool HybridTimeDomain::contains(const HybridTime& ht) const {
  if (ht.j < 0 || ht.j > jump_count()) return false;
  return ht.t >= interval_start(ht.j) - kTimeTol &&
         ht.t <= interval_end(ht.j) + kTimeTol;
}

HybridTimeDomain HybridTimeDomain::truncate(const HybridTime& ht) const {
  if (!contains(ht)) {
    throw std::domain_error("truncation point outside hybrid time domain");
  }
  std::vector<double> s(times_.begin(),
                        times_.begin() + static_cast<std::ptrdiff_t>(ht.j) + 1);
  // Clamp: ht.t may sit kTimeTol below the interval start.
  s.push_back(std::max(ht.t, s.back()));
  return HybridTimeDomain(std::move(s));
}

HybridTimeDomain HybridTimeDomain::concatenate(
    const HybridTimeDomain& suffix) const {
  const double shift = times_.back();
  // Drop this domain's terminal entry: the last flow interval of the prefix
  // and the first of the suffix live at the same jump level and fuse.
  std::vector<double> out(times_.begin(), times_.end() - 1);
  for (std::size_t i = 1; i < suffix.times_.size(); ++i) {
    out.push_back(shift + suffix.times_[i]);
  }
  return HybridTimeDomain(std::move(out));
}

bool HybridTimeDomain::approx_equal(const HybridTimeDomain& other,
                                    double tol) const {
  if (times_.size() != other.times_.size()) return false;
  for (std::size_t i = 0; i < times_.size(); ++i) {
    if (std::abs(times_[i] - other.times_[i]) > tol) return false;
  }
  return true;
}

}  // namespace hmpc
