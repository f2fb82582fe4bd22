#include "hmpc/horizon.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace hmpc {

PredictionHorizon::PredictionHorizon(std::vector<double> thresholds)
    : thresholds_(std::move(thresholds)) {
  if (thresholds_.size() < 2) {
    throw std::invalid_argument("prediction horizon needs at least {t_0, t_1}");
  }
  if (thresholds_.front() <= kTimeTol) {
    throw std::invalid_argument("prediction horizon requires t_0 > 0");
  }
  if (std::abs(thresholds_.back()) > kTimeTol) {
    throw std::invalid_argument("prediction horizon requires t_{J+1} = 0");
  }
  thresholds_.back() = 0.0;
  for (std::size_t i = 1; i < thresholds_.size(); ++i) {
    if (thresholds_[i] > thresholds_[i - 1] + kTimeTol) {
      throw std::invalid_argument("horizon thresholds must be nonincreasing");
    }
    if (thresholds_[i] > thresholds_[i - 1]) thresholds_[i] = thresholds_[i - 1];
  }
}

PredictionHorizon PredictionHorizon::generic(int N, double delta) {
  if (N < 1 || delta <= 0.0) {
    throw std::invalid_argument("generic horizon needs N >= 1 and delta > 0");
  }
  std::vector<double> th(static_cast<std::size_t>(N) + 2,
                         delta * static_cast<double>(N));
  th.back() = 0.0;
  return PredictionHorizon(std::move(th));
}

PredictionHorizon PredictionHorizon::band(double mu) {
  if (mu <= 0.0) {
    throw std::invalid_argument("band horizon needs mu > 0");
  }
  std::vector<double> th;
  for (int j = 0;; ++j) {
    const double tj = mu + 1.0 - static_cast<double>(j);
    if (tj <= kTimeTol) break;
    th.push_back(tj);
  }
  th.push_back(0.0);
  return PredictionHorizon(std::move(th));
}

bool PredictionHorizon::contains(const HybridTime& ht) const {
  if (ht.j < 0 || ht.j > max_jumps()) return false;
  return ht.t >= level_min_time(ht.j) - kTimeTol &&
         ht.t <= level_max_time(ht.j) + kTimeTol;
}

double PredictionHorizon::min_elapsed() const {
  double best = std::numeric_limits<double>::infinity();
  for (int j = 0; j <= max_jumps(); ++j) {
    best = std::min(best, level_min_time(j) + static_cast<double>(j));
  }
  return best;
}

std::optional<HybridTime> PredictionHorizon::reached(
    const HybridTimeDomain& dom) const {
  std::optional<HybridTime> best;
  const int levels = std::min(max_jumps(), dom.jump_count());
  for (int j = 0; j <= levels; ++j) {
    const double lo = std::max(dom.interval_start(j), level_min_time(j));
    const double hi = std::min(dom.interval_end(j), level_max_time(j));
    if (lo > hi + kTimeTol) continue;
    const HybridTime candidate{std::min(lo, hi), j};
    if (!best || candidate < *best) best = candidate;
  }
  return best;
}

}  // namespace hmpc
