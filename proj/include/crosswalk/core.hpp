#pragma once

// Hybrid automaton of pedestrian crossing behavior: four discrete action
// states over planar constant-velocity kinematics, with guard-triggered
// transitions and a velocity reset map applied on every discrete switch.

#include <Eigen/Dense>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace crosswalk {

using Matrix4 = Eigen::Matrix4d;

// Discrete pedestrian actions. Serialized as integers 1-4 in data files and
// as lowercase names in logs and reports.
enum class ActionState : int {
  Approach = 1,
  Wait = 2,
  Cross = 3,
  WalkAway = 4,
};

inline int action_to_int(ActionState a) { return static_cast<int>(a); }

inline ActionState action_from_int(int v) {
  if (v < 1 || v > 4) throw std::invalid_argument("action code out of range: " + std::to_string(v));
  return static_cast<ActionState>(v);
}

inline std::string_view action_name(ActionState a) {
  switch (a) {
    case ActionState::Approach: return "approach";
    case ActionState::Wait: return "wait";
    case ActionState::Cross: return "cross";
    case ActionState::WalkAway: return "walkaway";
  }
  return "?";
}

inline ActionState action_from_name(std::string_view name) {
  if (name == "approach") return ActionState::Approach;
  if (name == "wait") return ActionState::Wait;
  if (name == "cross") return ActionState::Cross;
  if (name == "walkaway") return ActionState::WalkAway;
  throw std::invalid_argument("unknown action name: " + std::string(name));
}

// Continuous pedestrian state. x runs along the road axis with the crosswalk
// centerline at x = 0; y runs across the road with the near curb at y = 0 and
// positive y into the roadway.
struct Kinematics {
  double x = 0.0;
  double y = 0.0;
  double vx = 0.0;
  double vy = 0.0;

  double speed() const { return std::hypot(vx, vy); }
  bool finite() const {
    return std::isfinite(x) && std::isfinite(y) && std::isfinite(vx) && std::isfinite(vy);
  }
};

// Curb-adjacent strip where waiting pedestrians trigger vehicle slow-downs.
struct WaitArea {
  double x_halfwidth = 3.0;
  double y_min = -1.0;
  double y_max = 0.0;

  bool contains(double x, double y) const {
    return std::abs(x) < x_halfwidth && y >= y_min && y <= y_max;
  }
};

struct GeometryConfig {
  double curb_y = 0.0;
  double lane_width = 3.7;
  int n_lanes = 2;
  double decision_halfwidth = 3.0;  // |x| bound of the decision zone
  WaitArea wait_area{};
  double epsilon_v = 0.05;  // speeds below this count as standing still
  double epsilon_x = 0.1;   // |x| below this makes the direction test degenerate
  double v_ped_max = 3.0;   // ground-truth pedestrian speed bound

  double road_width() const { return lane_width * n_lanes; }
  bool in_decision_zone(double x) const { return std::abs(x) < decision_halfwidth; }

  void validate() const {
    if (lane_width <= 0) throw std::invalid_argument("geometry: lane_width must be > 0");
    if (n_lanes < 1) throw std::invalid_argument("geometry: n_lanes must be >= 1");
    if (decision_halfwidth <= 0) throw std::invalid_argument("geometry: decision_halfwidth must be > 0");
    if (epsilon_v <= 0) throw std::invalid_argument("geometry: epsilon_v must be > 0");
    if (epsilon_x <= 0) throw std::invalid_argument("geometry: epsilon_x must be > 0");
    if (v_ped_max <= 0) throw std::invalid_argument("geometry: v_ped_max must be > 0");
  }
};

// A crossing decision pinned to one traffic gap: when it was taken, how long
// the pedestrian lingers before stepping off, and the initial crossing speed.
struct AcceptedGap {
  double acceptance_time = 0.0;
  double start_delay = 0.0;
  double start_speed = 0.0;
  double p_cross = 0.0;  // probability at acceptance, frozen for the gap
};

// Full tracker state: continuous estimate, covariance, discrete action and
// the decision bookkeeping carried between ticks.
struct HybridState {
  Kinematics kin{};
  Matrix4 cov = Matrix4::Identity();
  ActionState action = ActionState::Approach;
  std::optional<double> wait_entry_time;
  std::optional<AcceptedGap> accepted_gap;
};

// Evaluates the guard conditions with the epsilon convention: velocity
// components below epsilon_v are treated as zero. Priority resolves
// overlaps: standing still wins, then lateral motion, then the longitudinal
// direction test. Within epsilon_x of the centerline the direction test is
// degenerate and the previous state is retained.
inline ActionState classify_guards(const Kinematics& kin, ActionState prev,
                                   const GeometryConfig& geom) {
  const double vx = std::abs(kin.vx) < geom.epsilon_v ? 0.0 : kin.vx;
  const double vy = std::abs(kin.vy) < geom.epsilon_v ? 0.0 : kin.vy;
  if (vx == 0.0 && vy == 0.0) return ActionState::Wait;
  if (vy != 0.0) return ActionState::Cross;
  if (std::abs(kin.x) < geom.epsilon_x) return prev;
  const double toward = kin.x > 0.0 ? -vx : vx;  // positive when moving toward x = 0
  return toward > 0.0 ? ActionState::Approach : ActionState::WalkAway;
}

// Discrete transition function. Guard satisfaction drives the switch; the
// crossing state is additionally reachable from waiting through the decision
// trigger once the accepted gap's start delay has elapsed. Crossing is only
// reachable from waiting (or itself): a lateral-motion guard hit from any
// other state routes through an instantaneous wait.
inline ActionState transition(ActionState prev, const Kinematics& kin_next, double p_cross,
                              double now, const HybridState& state, const GeometryConfig& geom) {
  const ActionState guard = classify_guards(kin_next, prev, geom);
  if (guard == ActionState::Cross && prev != ActionState::Wait && prev != ActionState::Cross) {
    return ActionState::Wait;
  }
  if (prev == ActionState::Wait && guard == ActionState::Wait && state.accepted_gap &&
      p_cross > 0.5 && now - state.accepted_gap->acceptance_time >= state.accepted_gap->start_delay) {
    return ActionState::Cross;
  }
  return guard;
}

// Velocity reset map applied on discrete transitions. Positions are never
// touched. Entering approach/walk-away keeps the current walking speed when
// one is available so the reset does not kink a straight track; walk_speed
// is the fallback magnitude.
inline Kinematics reset_velocities(const Kinematics& kin, ActionState prev, ActionState next,
                                   double start_speed, double walk_speed) {
  if (prev == next) throw std::invalid_argument("reset_velocities: prev == next");
  Kinematics out = kin;
  switch (next) {
    case ActionState::Wait:
      out.vx = 0.0;
      out.vy = 0.0;
      break;
    case ActionState::Cross:
      out.vx = 0.0;
      out.vy = start_speed;  // crossing direction is +y
      break;
    case ActionState::Approach:
      out.vx = kin.x >= 0.0 ? -walk_speed : walk_speed;
      out.vy = 0.0;
      break;
    case ActionState::WalkAway:
      out.vx = kin.x >= 0.0 ? walk_speed : -walk_speed;
      out.vy = 0.0;
      break;
  }
  return out;
}

}  // namespace crosswalk
