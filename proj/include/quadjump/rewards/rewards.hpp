#pragma once

#include <array>
#include <map>
#include <string>

#include "quadjump/env/phase.hpp"
#include "quadjump/math/quaternion.hpp"
#include "quadjump/types.hpp"

namespace qj::rewards {

// The reward table rows, in print order.
enum class Term {
  LandingPosition,
  LandingOrientation,
  MaxHeight,
  Jumping,
  BasePosition,
  OrientationTracking,
  BaseLinearVelocity,
  BaseAngularVelocity,
  FeetClearance,
  Symmetry,
  NominalPose,
  Energy,
  BaseAcceleration,
  ContactChange,
  MaintainContact,
  ContactForces,
  ActionRate,
  JointAcceleration,
  JointLimits,
};
constexpr int kNumTerms = 19;
constexpr std::array<Term, kNumTerms> kAllTerms = {
    Term::LandingPosition,  Term::LandingOrientation, Term::MaxHeight,
    Term::Jumping,          Term::BasePosition,       Term::OrientationTracking,
    Term::BaseLinearVelocity, Term::BaseAngularVelocity, Term::FeetClearance,
    Term::Symmetry,         Term::NominalPose,        Term::Energy,
    Term::BaseAcceleration, Term::ContactChange,      Term::MaintainContact,
    Term::ContactForces,    Term::ActionRate,         Term::JointAcceleration,
    Term::JointLimits,
};

const char* term_name(Term t);

// Fixed targets printed in the table.
constexpr double kStanceHeightTarget = 0.20;
constexpr double kFlightHeightTarget = 0.7;
constexpr double kMaxHeightTarget = 0.9;
constexpr double kFeetTuckOffset = 0.15;

// Everything the table's right-hand sides consume, one control step.
// Base quantities are world frame; feet positions are base frame.
struct RewardContext {
  env::Phase phase = env::Phase::Stance;
  bool landing_eval = false;  // true exactly at the first Landing step

  Eigen::Vector3d p{0, 0, 0};
  math::UnitQuaternion q_base;
  Eigen::Vector3d v{0, 0, 0};
  Eigen::Vector3d omega{0, 0, 0};
  Eigen::Vector3d vdot{0, 0, 0};

  Eigen::Vector3d p_des{0, 0, 0};
  math::UnitQuaternion q_des;
  Eigen::Vector2d v_des{0, 0};      // flight target, planar
  Eigen::Vector3d omega_des{0, 0, 0};

  Vector12d q = Vector12d::Zero();
  Vector12d qd = Vector12d::Zero();
  Vector12d qdd = Vector12d::Zero();
  Vector12d q_nom = Vector12d::Zero();
  Vector12d soft_lower = Vector12d::Constant(-1e9);
  Vector12d soft_upper = Vector12d::Constant(1e9);
  Vector12d tau = Vector12d::Zero();

  Vector12d action = Vector12d::Zero();
  Vector12d action_prev = Vector12d::Zero();
  std::array<int, 4> contacts{};
  std::array<int, 4> contacts_prev{};
  std::array<Eigen::Vector3d, 4> foot_force{Eigen::Vector3d::Zero(), Eigen::Vector3d::Zero(),
                                            Eigen::Vector3d::Zero(), Eigen::Vector3d::Zero()};
  std::array<Eigen::Vector3d, 4> feet{};      // base frame
  std::array<Eigen::Vector3d, 4> feet_nom{};  // base frame at q_nom

  Eigen::Vector3d p_land{0, 0, 0};
  math::UnitQuaternion q_land;
  double h_max = 0.0;
};

struct RewardWeights {
  // task rows (kernel weights and scales)
  double w_landing_pos = 1.0, sigma_landing_pos = 0.25;
  double w_landing_ori = 1.0, sigma_landing_ori = 0.25;
  double w_max_height = 1.0, sigma_max_height = 0.25;
  double w_jump = 1.0;
  double w_base_pos_stance = 1.0, sigma_base_pos_stance = 0.25;
  double w_base_pos_flight = 1.0, sigma_base_pos_flight = 0.25;
  double w_base_pos_landing = 1.0, sigma_base_pos_landing = 0.25;
  double w_ori_stance = 1.0, sigma_ori_stance = 0.25;
  double w_ori_landing = 1.0, sigma_ori_landing = 0.25;
  double w_lin_vel = 1.0, sigma_lin_vel = 0.25;
  double w_ang_vel = 1.0, sigma_ang_vel = 0.25;
  double w_nominal_pose = 1.0, sigma_nominal_pose = 0.25;
  double w_maintain_contact = 0.025;
  // regularisation rows (nonnegative magnitudes entering the penalty vector)
  double w_feet_clearance = 0.25;
  double w_symmetry = 0.1;
  double w_energy = 2e-4;
  double w_base_acc = 1e-3;
  double w_contact_change = 0.1;
  double w_contact_forces = 1e-3;
  double w_action_rate = 1e-2;
  double w_joint_acc = 2.5e-7;
  double w_joint_limits = 1.0;

  double sigma_total = 1.0;
};

// Value of one table row for this context. Cells printed as 0 return
// exactly 0; Single rows are nonzero only at the landing-evaluation step.
// Energy is signed (negative work shows as a negative value); every other
// row is nonnegative.
double evaluate_term(Term term, const RewardContext& ctx, const RewardWeights& w);

// r_total = r_plus * exp(-||r_minus||^2 / sigma_total)
double combine(double task_sum, const Eigen::VectorXd& penalties, double sigma_total);

struct StepReward {
  double total = 0.0;
  double task_sum = 0.0;
  double penalty_sq_norm = 0.0;
  std::array<double, kNumTerms> terms{};
};

StepReward step_reward(const RewardContext& ctx, const RewardWeights& w);

struct FlightTargets {
  Eigen::Vector2d v_des{0, 0};
  Eigen::Vector3d omega_des{0, 0, 0};
};

// Ballistic targets fixed at the Stance -> Flight transition: planar
// velocity that carries the base to the target over the flight time, and
// the yaw rate that achieves the desired yaw change.
FlightTargets flight_targets(const Eigen::Vector3d& takeoff_pos, double takeoff_vz,
                             double takeoff_yaw, const Eigen::Vector3d& p_des, double yaw_des);

}  // namespace qj::rewards
