#pragma once

// Trajectory, distribution and classification metrics used by the
// evaluation pipeline.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "crosswalk/core.hpp"

namespace crosswalk {

struct TrajectoryPoint {
  double t = 0.0;
  double x = 0.0;
  double y = 0.0;
};

// Aligned predicted/actual tracks. Lengths must match; timestamps are
// expected to agree within a tenth of the sampling interval.
struct TrajectoryPair {
  std::span<const TrajectoryPoint> predicted;
  std::span<const TrajectoryPoint> actual;

  void validate() const {
    if (predicted.empty() || actual.empty()) throw std::invalid_argument("trajectory pair is empty");
    if (predicted.size() != actual.size()) throw std::invalid_argument("trajectory pair length mismatch");
  }
};

inline double point_distance(const TrajectoryPoint& a, const TrajectoryPoint& b) {
  return std::hypot(a.x - b.x, a.y - b.y);
}

// Mean Euclidean distance over all aligned steps.
inline double ade(const TrajectoryPair& pair) {
  pair.validate();
  double sum = 0.0;
  for (std::size_t i = 0; i < pair.predicted.size(); ++i) {
    sum += point_distance(pair.predicted[i], pair.actual[i]);
  }
  return sum / static_cast<double>(pair.predicted.size());
}

// Euclidean distance at the final step.
inline double fde(const TrajectoryPair& pair) {
  pair.validate();
  return point_distance(pair.predicted.back(), pair.actual.back());
}

// Root of the mean squared Euclidean distance.
inline double rmse(const TrajectoryPair& pair) {
  pair.validate();
  double sum_sq = 0.0;
  for (std::size_t i = 0; i < pair.predicted.size(); ++i) {
    const double d = point_distance(pair.predicted[i], pair.actual[i]);
    sum_sq += d * d;
  }
  return std::sqrt(sum_sq / static_cast<double>(pair.predicted.size()));
}

// Discrete KL(P||Q) between histograms of the two sample sets, binned over
// the pooled sample range with additive smoothing.
inline double kl_divergence(std::span<const double> p_samples, std::span<const double> q_samples,
                            int bins = 20) {
  if (p_samples.empty() || q_samples.empty()) throw std::invalid_argument("kl_divergence: empty sample set");
  if (bins < 2) throw std::invalid_argument("kl_divergence: bins must be >= 2");

  double lo = p_samples[0], hi = p_samples[0];
  for (double v : p_samples) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  for (double v : q_samples) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  const double width = hi > lo ? (hi - lo) : 1.0;

  auto histogram = [&](std::span<const double> samples) {
    std::vector<double> h(static_cast<std::size_t>(bins), 0.0);
    for (double v : samples) {
      int b = static_cast<int>((v - lo) / width * bins);
      b = std::clamp(b, 0, bins - 1);
      h[static_cast<std::size_t>(b)] += 1.0;
    }
    constexpr double kSmoothing = 1e-6;
    const double n = static_cast<double>(samples.size());
    double total = 0.0;
    for (double& v : h) {
      v = v / n + kSmoothing;
      total += v;
    }
    for (double& v : h) v /= total;
    return h;
  };

  const auto p = histogram(p_samples);
  const auto q = histogram(q_samples);
  double kl = 0.0;
  for (int b = 0; b < bins; ++b) {
    kl += p[static_cast<std::size_t>(b)] * std::log(p[static_cast<std::size_t>(b)] / q[static_cast<std::size_t>(b)]);
  }
  return kl;
}

// Empirical CDF of accepted-gap durations: sorted samples with cumulative
// fractions, terminal value 1.
inline std::vector<std::pair<double, double>> cumulative_gap_curve(std::span<const double> accepted_gaps) {
  if (accepted_gaps.empty()) throw std::invalid_argument("cumulative_gap_curve: empty sample set");
  std::vector<double> sorted(accepted_gaps.begin(), accepted_gaps.end());
  std::sort(sorted.begin(), sorted.end());
  std::vector<std::pair<double, double>> curve;
  curve.reserve(sorted.size());
  const double n = static_cast<double>(sorted.size());
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    curve.emplace_back(sorted[i], static_cast<double>(i + 1) / n);
  }
  return curve;
}

struct WalkingSpeedStats {
  std::optional<double> crossing_mean;
  std::optional<double> sidewalk_mean;
};

// Speeds recovered from positions by central finite differences, smoothed by
// a centered moving average applied per velocity component before taking the
// magnitude, then averaged separately over crossing ticks and over
// approach/walk-away ticks.
inline WalkingSpeedStats walking_speed_stats(std::span<const TrajectoryPoint> trajectory,
                                             std::span<const ActionState> actions,
                                             int window = 5) {
  const std::size_t n = trajectory.size();
  if (n != actions.size()) throw std::invalid_argument("walking_speed_stats: length mismatch");
  if (n <= static_cast<std::size_t>(window)) throw std::invalid_argument("walking_speed_stats: trajectory shorter than window");

  std::vector<double> vx(n, 0.0), vy(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t lo = i == 0 ? 0 : i - 1;
    const std::size_t hi = i + 1 < n ? i + 1 : n - 1;
    const double dt = trajectory[hi].t - trajectory[lo].t;
    if (dt <= 0.0) throw std::invalid_argument("walking_speed_stats: non-increasing timestamps");
    vx[i] = (trajectory[hi].x - trajectory[lo].x) / dt;
    vy[i] = (trajectory[hi].y - trajectory[lo].y) / dt;
  }

  const int half = window / 2;
  auto smooth = [&](const std::vector<double>& v, std::size_t i) {
    const std::size_t lo = i >= static_cast<std::size_t>(half) ? i - static_cast<std::size_t>(half) : 0;
    const std::size_t hi = std::min(i + static_cast<std::size_t>(half), n - 1);
    double sum = 0.0;
    for (std::size_t k = lo; k <= hi; ++k) sum += v[k];
    return sum / static_cast<double>(hi - lo + 1);
  };

  double cross_sum = 0.0, side_sum = 0.0;
  std::size_t cross_n = 0, side_n = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double speed = std::hypot(smooth(vx, i), smooth(vy, i));
    if (actions[i] == ActionState::Cross) {
      cross_sum += speed;
      ++cross_n;
    } else if (actions[i] == ActionState::Approach || actions[i] == ActionState::WalkAway) {
      side_sum += speed;
      ++side_n;
    }
  }

  WalkingSpeedStats stats;
  if (cross_n > 0) stats.crossing_mean = cross_sum / static_cast<double>(cross_n);
  if (side_n > 0) stats.sidewalk_mean = side_sum / static_cast<double>(side_n);
  return stats;
}

struct ClassificationReport {
  double accuracy = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  int tp = 0, fp = 0, fn = 0, tn = 0;
};

// Standard binary metrics with the accepted class positive. Undefined ratios
// resolve to 0.
inline ClassificationReport classification_metrics(std::span<const int> labels,
                                                   std::span<const double> probabilities,
                                                   double threshold = 0.5) {
  if (labels.empty() || labels.size() != probabilities.size()) {
    throw std::invalid_argument("classification_metrics: bad input sizes");
  }
  ClassificationReport r;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const bool pred = probabilities[i] > threshold;
    const bool truth = labels[i] != 0;
    if (pred && truth) ++r.tp;
    else if (pred && !truth) ++r.fp;
    else if (!pred && truth) ++r.fn;
    else ++r.tn;
  }
  const double total = static_cast<double>(labels.size());
  r.accuracy = (r.tp + r.tn) / total;
  r.precision = (r.tp + r.fp) > 0 ? static_cast<double>(r.tp) / (r.tp + r.fp) : 0.0;
  r.recall = (r.tp + r.fn) > 0 ? static_cast<double>(r.tp) / (r.tp + r.fn) : 0.0;
  r.f1 = (r.precision + r.recall) > 0 ? 2.0 * r.precision * r.recall / (r.precision + r.recall) : 0.0;
  return r;
}

}  // namespace crosswalk
