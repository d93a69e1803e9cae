#pragma once

#include "quadjump/math/quaternion.hpp"
#include "quadjump/types.hpp"

namespace qj::env {

using GoalVector = Eigen::Matrix<double, 13, 1>;

// Desired landing pose plus obstacle descriptor, expressed in the frame of
// the robot at reset (yaw-aligned, origin on the ground under the base).
// Concatenated as g = [dp_des(3), dq_des(4, wxyz), p_obs(3), dim_obs(3)].
struct Command {
  Eigen::Vector3d dp_des{0, 0, 0};         // landing displacement [m]
  math::UnitQuaternion dq_des;             // landing orientation change
  Eigen::Vector3d p_obs{0, 0, 0};          // obstacle centre, zero when absent
  Eigen::Vector3d dim_obs{0, 0, 0};        // height, width, length; zero when absent
  bool has_obstacle = false;

  GoalVector goal() const {
    GoalVector g;
    g << dp_des, dq_des.w, dq_des.x, dq_des.y, dq_des.z, p_obs, dim_obs;
    return g;
  }
};

struct EpisodeOutcome {
  enum class Cause { None, Collision, LowHeight, Orientation, LandingError, Timeout, Diverged };

  bool terminated = false;  // a failure cause fired (timeout is a natural end)
  Cause cause = Cause::None;
  bool landed = false;
  double landing_pos_error = std::numeric_limits<double>::infinity();  // settled, planar [m]
  double landing_yaw_error = std::numeric_limits<double>::infinity();  // settled [rad]
  double h_max = 0.0;

  // promotion gate: landed cleanly within the landing-error threshold
  bool success(double gate) const { return landed && !terminated && landing_pos_error <= gate; }
};

const char* to_string(EpisodeOutcome::Cause c);

}  // namespace qj::env
