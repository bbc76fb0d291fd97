#pragma once

// Longitudinal vehicle model for the simulated approach corridor. Vehicles
// travel in +x with the crosswalk at x = 0; reactions to the pedestrian
// depend on the active driving profile and the pedestrian's zone.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "crosswalk/core.hpp"
#include "crosswalk/rng.hpp"

namespace crosswalk {

struct DrivingProfile {
  std::string name;
  double reaction_distance = 0.0;  // m, pedestrian proximity that triggers a reaction
  double stopped_distance = 0.0;   // m, front-bumper margin ahead of the crosswalk when stopped
  double max_accel = 0.0;          // m/s^2, symmetric accel/brake bound
  std::optional<double> slow_speed;  // m/s target near a waiting pedestrian; none = no slow-down
  double full_speed = 15.6;          // m/s cruise speed

  void validate() const {
    if (reaction_distance <= 0 || stopped_distance <= 0 || full_speed <= 0) {
      throw std::invalid_argument("driving profile: distances and speeds must be > 0");
    }
    if (max_accel <= 0) throw std::invalid_argument("driving profile: max_accel must be > 0");
    if (slow_speed && *slow_speed <= 0) throw std::invalid_argument("driving profile: slow_speed must be > 0");
  }

  static DrivingProfile defensive() { return {"defensive", 50.0, 3.0, 3.0, 4.0, 15.6}; }
  static DrivingProfile normal() { return {"normal", 30.0, 2.0, 5.0, 7.0, 15.6}; }
  static DrivingProfile aggressive() { return {"aggressive", 10.0, 1.0, 8.0, std::nullopt, 15.6}; }

  static DrivingProfile by_name(const std::string& name) {
    if (name == "defensive") return defensive();
    if (name == "normal") return normal();
    if (name == "aggressive") return aggressive();
    throw std::invalid_argument("unknown driving profile: " + name);
  }
};

struct VehicleState {
  int id = 0;
  int lane = 0;
  double x = 0.0;      // front-bumper position along the road axis
  double speed = 0.0;  // m/s, never negative
  double accel = 0.0;  // m/s^2 applied over the last step
};

inline constexpr double kVehicleLength = 4.5;  // m, used for queue spacing
inline constexpr double kQueueMargin = 1.5;    // m, standstill gap to the lead vehicle

// Lane index of a roadway position, or nullopt when off the road.
inline std::optional<int> lane_of(double y, const GeometryConfig& geom) {
  const double offset = y - geom.curb_y;
  if (offset <= 0.0 || offset > geom.road_width()) return std::nullopt;
  const int lane = static_cast<int>(offset / geom.lane_width);
  return std::min(lane, geom.n_lanes - 1);
}

// One step of the longitudinal controller. The pedestrian pointer may be
// null (empty road phase). lead is the nearest same-lane vehicle ahead, if
// any; the follower brakes to keep a standstill margin behind it.
inline VehicleState av_step(const VehicleState& veh, const Kinematics* ped,
                            const DrivingProfile& profile, const GeometryConfig& geom, double dt,
                            const VehicleState* lead = nullptr) {
  if (dt <= 0.0) throw std::invalid_argument("av_step: dt must be > 0");

  double target_speed = profile.full_speed;
  double stop_at = std::numeric_limits<double>::infinity();

  if (ped != nullptr) {
    const double dist_ahead = ped->x - veh.x;
    if (dist_ahead > 0.0 && dist_ahead <= profile.reaction_distance) {
      const auto ped_lane = lane_of(ped->y, geom);
      if (ped_lane && *ped_lane == veh.lane) {
        target_speed = 0.0;
        stop_at = -profile.stopped_distance;
      } else if (geom.wait_area.contains(ped->x, ped->y)) {
        if (profile.slow_speed) target_speed = *profile.slow_speed;
      }
    }
  }

  if (lead != nullptr) {
    stop_at = std::min(stop_at, lead->x - kVehicleLength - kQueueMargin);
  }

  // Speed tracking, clamped to the profile's acceleration bound.
  double accel = std::clamp((target_speed - veh.speed) / dt, -profile.max_accel, profile.max_accel);

  // Braking constraint toward the nearest stop point, if one is binding.
  if (std::isfinite(stop_at)) {
    const double d = stop_at - veh.x;
    if (d <= 0.0) {
      accel = -profile.max_accel;
    } else if (veh.speed > 0.0) {
      const double required = veh.speed * veh.speed / (2.0 * d);
      accel = std::min(accel, -std::min(required, profile.max_accel));
    }
  }

  double new_speed = std::clamp(veh.speed + accel * dt, 0.0, profile.full_speed);
  // Snap to rest when crawling toward a stop point.
  if (std::isfinite(stop_at) && new_speed < 0.02 && target_speed == 0.0) new_speed = 0.0;

  VehicleState out = veh;
  out.accel = (new_speed - veh.speed) / dt;
  out.x = veh.x + 0.5 * (veh.speed + new_speed) * dt;
  out.speed = new_speed;
  return out;
}

// Spawn scheduler: one interleaved stream, a new vehicle every 3 or 5 s
// (drawn uniformly), entering at spawn_x at cruise speed in a uniformly
// chosen lane. A spawn is held while the entry point is blocked.
class SpawnScheduler {
 public:
  SpawnScheduler(double spawn_x, std::vector<double> gap_choices, int n_lanes)
      : spawn_x_(spawn_x), gap_choices_(std::move(gap_choices)), n_lanes_(n_lanes) {
    if (gap_choices_.empty()) throw std::invalid_argument("spawn gaps must be nonempty");
  }

  std::optional<VehicleState> step(double t, const std::vector<VehicleState>& traffic,
                                   const DrivingProfile& profile, Rng& rng) {
    if (!pending_gap_) {
      pending_gap_ = gap_choices_[rng.uniform_index(gap_choices_.size())];
    }
    if (t - last_spawn_ < *pending_gap_ && spawned_any_) return std::nullopt;

    const int lane = static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(n_lanes_)));
    for (const auto& veh : traffic) {
      if (veh.lane == lane && std::abs(veh.x - spawn_x_) < kVehicleLength + kQueueMargin) {
        return std::nullopt;  // entry blocked; retry next tick
      }
    }

    VehicleState veh;
    veh.id = next_id_++;
    veh.lane = lane;
    veh.x = spawn_x_;
    veh.speed = profile.full_speed;
    veh.accel = 0.0;
    last_spawn_ = t;
    spawned_any_ = true;
    pending_gap_.reset();
    return veh;
  }

 private:
  double spawn_x_;
  std::vector<double> gap_choices_;
  int n_lanes_;
  double last_spawn_ = 0.0;
  bool spawned_any_ = false;
  std::optional<double> pending_gap_;
  int next_id_ = 0;
};

// Nearest same-lane vehicle ahead of veh, if any.
inline const VehicleState* find_lead(const VehicleState& veh, const std::vector<VehicleState>& traffic) {
  const VehicleState* lead = nullptr;
  for (const auto& other : traffic) {
    if (other.id == veh.id || other.lane != veh.lane || other.x <= veh.x) continue;
    if (lead == nullptr || other.x < lead->x) lead = &other;
  }
  return lead;
}

// Advances every vehicle one step and drops the ones past the exit bound.
inline void step_traffic(std::vector<VehicleState>& traffic, const Kinematics* ped,
                         const DrivingProfile& profile, const GeometryConfig& geom, double dt,
                         double exit_x) {
  std::vector<VehicleState> next;
  next.reserve(traffic.size());
  for (const auto& veh : traffic) {
    const VehicleState* lead = find_lead(veh, traffic);
    next.push_back(av_step(veh, ped, profile, geom, dt, lead));
  }
  std::erase_if(next, [exit_x](const VehicleState& v) { return v.x > exit_x; });
  traffic = std::move(next);
}

}  // namespace crosswalk
