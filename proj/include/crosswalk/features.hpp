#pragma once

// Traffic-gap events and the feature vector evaluated at each gap start.
// A gap starts when a vehicle front passes the pedestrian's longitudinal
// position, or when the pedestrian enters the decision zone mid-gap.

#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "crosswalk/core.hpp"
#include "crosswalk/vehicle.hpp"

namespace crosswalk {

struct FeatureVector {
  double av_distance = 0.0;    // m, longitudinal gap to the nearest approaching vehicle
  double av_speed = 0.0;       // m/s, speed of that vehicle
  double wait_time = 0.0;      // s since waiting started (0 when not waiting)
  double gaze_ratio = 0.0;     // fraction of the previous second spent looking at vehicles
  double curb_distance = 0.0;  // m, lateral distance to the road edge
  double cw_distance = 0.0;    // m, longitudinal distance to the crosswalk
  double ped_speed = 0.0;      // m/s, mean speed over the previous second

  static constexpr std::size_t kCount = 7;

  static constexpr std::array<std::string_view, kCount> names() {
    return {"av_distance", "av_speed", "wait_time", "gaze_ratio",
            "curb_distance", "cw_distance", "ped_speed"};
  }

  std::array<double, kCount> to_array() const {
    return {av_distance, av_speed, wait_time, gaze_ratio, curb_distance, cw_distance, ped_speed};
  }

  static FeatureVector from_array(const std::array<double, kCount>& a) {
    return {a[0], a[1], a[2], a[3], a[4], a[5], a[6]};
  }
};

enum class GapLabel { Accepted, Rejected, Undetermined };

inline std::string_view gap_label_name(GapLabel label) {
  switch (label) {
    case GapLabel::Accepted: return "accepted";
    case GapLabel::Rejected: return "rejected";
    case GapLabel::Undetermined: return "undetermined";
  }
  return "?";
}

inline GapLabel gap_label_from_name(std::string_view name) {
  if (name == "accepted") return GapLabel::Accepted;
  if (name == "rejected") return GapLabel::Rejected;
  if (name == "undetermined") return GapLabel::Undetermined;
  throw std::invalid_argument("unknown gap label: " + std::string(name));
}

struct GapEvent {
  std::string id;
  double start_time = 0.0;
  // Time for the next approaching vehicle to reach the pedestrian's
  // longitudinal position; +inf when the road ahead is clear.
  double traffic_gap = 0.0;
  FeatureVector features{};
  GapLabel label = GapLabel::Undetermined;
};

inline constexpr double kMinGapSpeed = 0.1;  // m/s floor in the gap-time division

// Nearest vehicle that has not yet passed the pedestrian's position, in any
// lane. Vehicles travel in +x, so approaching means front at x <= ped_x.
inline const VehicleState* nearest_approaching(std::span<const VehicleState> traffic, double ped_x) {
  const VehicleState* best = nullptr;
  for (const auto& veh : traffic) {
    if (veh.x > ped_x) continue;
    if (best == nullptr || veh.x > best->x) best = &veh;
  }
  return best;
}

inline double traffic_gap_seconds(std::span<const VehicleState> traffic, double ped_x) {
  const VehicleState* next = nearest_approaching(traffic, ped_x);
  if (next == nullptr) return std::numeric_limits<double>::infinity();
  return (ped_x - next->x) / std::max(next->speed, kMinGapSpeed);
}

// Detects a gap start between the previous tick and this one. Emits only
// while the pedestrian is in the decision zone and approaching or waiting.
// The caller attaches features afterwards; it owns the history buffers.
inline std::optional<GapEvent> detect_gap_start(std::span<const VehicleState> traffic,
                                                std::span<const VehicleState> prev_traffic,
                                                const HybridState& ped,
                                                std::optional<double> prev_ped_x, double t,
                                                const GeometryConfig& geom) {
  if (ped.action != ActionState::Approach && ped.action != ActionState::Wait) return std::nullopt;
  const double ped_x = ped.kin.x;
  if (!geom.in_decision_zone(ped_x)) return std::nullopt;

  bool vehicle_passed = false;
  for (const auto& veh : traffic) {
    if (veh.x < ped_x) continue;
    for (const auto& prev : prev_traffic) {
      if (prev.id == veh.id) {
        if (prev.x < ped_x) vehicle_passed = true;
        break;
      }
    }
    if (vehicle_passed) break;
  }

  const bool entered_zone = prev_ped_x.has_value() && !geom.in_decision_zone(*prev_ped_x);
  if (!vehicle_passed && !entered_zone) return std::nullopt;

  GapEvent event;
  event.start_time = t;
  event.traffic_gap = traffic_gap_seconds(traffic, ped_x);
  return event;
}

struct PedSample {
  double t = 0.0;
  Kinematics kin{};
};

struct GazeSample {
  double t = 0.0;
  bool at_vehicle = false;
};

struct FeatureExtraction {
  FeatureVector features{};
  bool partial = false;  // history did not cover the full averaging window
};

inline constexpr double kFeatureWindow = 1.0;      // s of history behind each feature
inline constexpr double kClearRoadDistance = 200.0;  // m sentinel when no vehicle approaches

// Feature vector at time t from the trailing history window. The last
// history sample is the pedestrian's current state.
inline FeatureExtraction extract_features(std::span<const PedSample> history,
                                          std::optional<double> wait_entry_time,
                                          std::span<const VehicleState> traffic,
                                          std::span<const GazeSample> gaze,
                                          const GeometryConfig& geom, double t) {
  if (history.empty()) throw std::invalid_argument("extract_features: empty history");

  FeatureExtraction out;
  const Kinematics& kin = history.back().kin;

  const VehicleState* next = nearest_approaching(traffic, kin.x);
  if (next != nullptr) {
    out.features.av_distance = kin.x - next->x;
    out.features.av_speed = next->speed;
  } else {
    out.features.av_distance = kClearRoadDistance;
    out.features.av_speed = 0.0;
  }

  out.features.wait_time = wait_entry_time ? std::max(0.0, t - *wait_entry_time) : 0.0;
  out.features.curb_distance = std::abs(kin.y - geom.curb_y);
  out.features.cw_distance = std::abs(kin.x);

  const double window_start = t - kFeatureWindow;
  double speed_sum = 0.0;
  std::size_t speed_n = 0;
  for (const auto& sample : history) {
    if (sample.t < window_start - 1e-9 || sample.t > t + 1e-9) continue;
    speed_sum += sample.kin.speed();
    ++speed_n;
  }
  out.features.ped_speed = speed_n > 0 ? speed_sum / static_cast<double>(speed_n) : kin.speed();

  double gaze_sum = 0.0;
  std::size_t gaze_n = 0;
  for (const auto& sample : gaze) {
    if (sample.t < window_start - 1e-9 || sample.t > t + 1e-9) continue;
    gaze_sum += sample.at_vehicle ? 1.0 : 0.0;
    ++gaze_n;
  }
  out.features.gaze_ratio = gaze_n > 0 ? gaze_sum / static_cast<double>(gaze_n) : 0.0;

  out.partial = history.front().t > window_start + 1e-9;
  return out;
}

// Labels a gap from the observed trajectory: accepted when the pedestrian
// steps onto the road within the gap window, rejected when the window
// elapses on the curb side, undetermined when the trajectory ends first.
inline GapEvent label_gap(GapEvent event, std::span<const PedSample> trajectory,
                          const GeometryConfig& geom) {
  const double window_end = event.start_time + event.traffic_gap;
  event.label = GapLabel::Undetermined;
  for (const auto& sample : trajectory) {
    if (sample.t < event.start_time) continue;
    if (sample.t >= window_end) {
      event.label = GapLabel::Rejected;
      return event;
    }
    if (sample.kin.y > geom.curb_y) {
      event.label = GapLabel::Accepted;
      return event;
    }
  }
  return event;
}

}  // namespace crosswalk
