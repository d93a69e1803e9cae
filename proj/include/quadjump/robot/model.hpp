#pragma once

#include <array>
#include <string>

#include "quadjump/math/quaternion.hpp"
#include "quadjump/types.hpp"

namespace qj::robot {

// One rigid link, attached to its parent by a revolute joint. The link frame
// has its origin at the joint and rotates with it; at q = 0 it is aligned
// with the parent frame.
struct Link {
  std::string name;
  int parent = -1;                // -1 = floating base
  Eigen::Vector3d joint_origin;   // joint position in parent frame
  Eigen::Vector3d axis;           // unit rotation axis (parent frame at q = 0)
  double mass = 0.0;
  Eigen::Vector3d com;            // centre of mass in link frame
  Eigen::Vector3d inertia_diag;   // principal inertia about com [kg m^2]
  double lower = 0.0, upper = 0.0;       // position limits [rad]
  double velocity_limit = 0.0;           // [rad/s]
  double torque_limit = 0.0;             // [N m]
};

struct BasePose {
  Eigen::Vector3d position{0, 0, 0};
  math::UnitQuaternion orientation;
};

struct FramePose {
  Eigen::Vector3d origin;
  Eigen::Matrix3d rot;
};

// Collision proxies: base box, hip spheres, calf segments.
struct CollisionGeometry {
  Eigen::Vector3d base_half_extents{0.26, 0.10, 0.05};
  double hip_radius = 0.045;
  double foot_radius = 0.02;
  double calf_clearance = 0.05;  // length near the foot excluded from calf collision
  // Calf-vs-surface checks ignore dips shallower than this. Penalty
  // contacts let feet sink a few centimetres during hard impacts, which
  // drags the calf tip with them; without the allowance every firm landing
  // would read as a body collision.
  double calf_ground_tolerance = 0.04;
};

// 12-joint quadruped: floating base + 4 legs x {hip roll, thigh pitch,
// calf pitch}. Legs and joints are ordered FL, FR, RL, RR (leg-major);
// joint index = 3*leg + {0: hip, 1: thigh, 2: calf}.
struct RobotModel {
  static constexpr int kNumLegs = 4;
  static constexpr int kNumJoints = 12;

  std::string name;
  double base_mass = 0.0;
  Eigen::Vector3d base_com;
  Eigen::Vector3d base_inertia_diag;
  std::array<Link, kNumJoints> links;  // leg-major order, parent indices into this array
  Vector12d q_nom;
  Eigen::Vector3d foot_offset;  // foot centre in calf frame
  CollisionGeometry collision;

  double total_mass() const;
  Vector12d lower_limits() const;
  Vector12d upper_limits() const;
  Vector12d velocity_limits() const;
  Vector12d torque_limits() const;
  // soft limits cover the central 90% of each hard range
  Vector12d soft_lower_limits() const;
  Vector12d soft_upper_limits() const;

  // base height that puts the lowest foot centre foot_radius above z = 0 at q_nom
  double standing_height() const;
};

// Parses and validates a model description document. Throws
// std::runtime_error with a descriptive message on any schema or
// invariant violation (non-positive mass/inertia, bad limits,
// left/right asymmetry, wrong topology).
RobotModel load_model(const std::string& path);
RobotModel load_model_from_json(const std::string& text);

// World poses of all 12 link frames.
std::array<FramePose, RobotModel::kNumJoints> link_poses(const RobotModel& model,
                                                         const BasePose& base,
                                                         const Vector12d& q);

// World positions of the four foot centres, ordered FL, FR, RL, RR.
std::array<Eigen::Vector3d, 4> fk_feet(const RobotModel& model, const BasePose& base,
                                       const Vector12d& q);

// Foot positions in the base frame (relative to the base origin).
std::array<Eigen::Vector3d, 4> feet_in_base(const RobotModel& model, const Vector12d& q);

// 3x18 Jacobian of a foot position w.r.t. [v_base, omega_base, qdot]
// (world-frame base twist). Columns of joints on other legs are zero.
Matrix3x18d foot_jacobian(const RobotModel& model, const BasePose& base, const Vector12d& q,
                          int foot_index);

}  // namespace qj::robot
