#pragma once

#include <vector>

#include "quadjump/math/quaternion.hpp"
#include "quadjump/robot/model.hpp"
#include "quadjump/types.hpp"

namespace qj::phys {

// Generic floating-base tree of rigid bodies joined by revolute joints.
// The quadruped maps onto this; tests also instantiate small fixtures
// (pendulum, single body) directly against it.
struct TreeLink {
  int parent = -1;                // -1 = base
  Eigen::Vector3d joint_origin;   // joint position in parent frame
  Eigen::Vector3d axis;           // unit axis in parent frame
  double mass = 0.0;
  Eigen::Vector3d com;            // in link frame
  Eigen::Matrix3d inertia;        // about com, link frame
};

struct TreeModel {
  double base_mass = 0.0;
  Eigen::Vector3d base_com;
  Eigen::Matrix3d base_inertia;
  std::vector<TreeLink> links;  // topological order (parent before child)

  int dof() const { return 6 + static_cast<int>(links.size()); }
};

TreeModel make_tree(const robot::RobotModel& model);

// Generalized velocity layout: [v_base; omega_base; qdot], world-frame base twist
// taken at the base frame origin.
struct TreeState {
  Eigen::Vector3d base_pos;
  math::UnitQuaternion base_quat;
  Eigen::Vector3d v_world;      // base origin velocity
  Eigen::Vector3d omega_world;  // base angular velocity
  Eigen::VectorXd q, qd;
};

// External point force on a link (link = -1 for the base), world frame.
struct PointForce {
  int link = -1;
  Eigen::Vector3d point;
  Eigen::Vector3d force;
};

// Per-body world-frame kinematics from one outward recursion.
struct BodyKinematics {
  Eigen::Vector3d origin;      // joint frame origin
  Eigen::Matrix3d rot;
  Eigen::Vector3d axis_world;  // joint axis (undefined for the base entry)
  Eigen::Vector3d com;         // centre of mass
  Eigen::Vector3d omega;
  Eigen::Vector3d v_origin;
  Eigen::Vector3d v_com;
  Eigen::Vector3d alpha_bias;  // angular acceleration with qddot = 0, base acc = 0
  Eigen::Vector3d a_com_bias;  // com linear acceleration, same convention
};

// index 0 = base, index i+1 = links[i]
std::vector<BodyKinematics> tree_kinematics(const TreeModel& model, const TreeState& state);

// Joint-space mass matrix and bias vector (Coriolis/centrifugal/gyroscopic
// plus gravity) for the equation M udot + h = S tau + sum J^T F.
void tree_mass_and_bias(const TreeModel& model, const std::vector<BodyKinematics>& kin,
                        Eigen::MatrixXd& mass, Eigen::VectorXd& bias, double gravity = 9.81);

// 3 x dof Jacobian of a world point attached to a body (-1 = base).
Eigen::MatrixXd tree_point_jacobian(const TreeModel& model,
                                    const std::vector<BodyKinematics>& kin, int link,
                                    const Eigen::Vector3d& point);

// Solves M(q) udot = S tau + sum J^T F - h(q, u) with gravity along -z.
// Returns [base linear acc (world); base angular acc (world); qddot].
Eigen::VectorXd tree_forward_dynamics(const TreeModel& model, const TreeState& state,
                                      const Eigen::VectorXd& tau,
                                      const std::vector<PointForce>& forces,
                                      double gravity = 9.81);

// Diagnostics used by tests and invariant checks.
Eigen::Vector3d total_com(const TreeModel& model, const std::vector<BodyKinematics>& kin);
Eigen::Vector3d com_velocity(const TreeModel& model, const std::vector<BodyKinematics>& kin);
Eigen::Vector3d angular_momentum_about_com(const TreeModel& model,
                                           const std::vector<BodyKinematics>& kin);
double kinetic_energy(const TreeModel& model, const std::vector<BodyKinematics>& kin);
double potential_energy(const TreeModel& model, const std::vector<BodyKinematics>& kin,
                        double gravity = 9.81);

}  // namespace qj::phys
