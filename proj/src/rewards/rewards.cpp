#include "quadjump/rewards/rewards.hpp"

#include <cmath>
#include <stdexcept>

#include "quadjump/math/kernel.hpp"

namespace qj::rewards {

using env::Phase;
using math::exp_kernel;

const char* term_name(Term t) {
  switch (t) {
    case Term::LandingPosition: return "landing_position";
    case Term::LandingOrientation: return "landing_orientation";
    case Term::MaxHeight: return "max_height";
    case Term::Jumping: return "jumping";
    case Term::BasePosition: return "base_position";
    case Term::OrientationTracking: return "orientation_tracking";
    case Term::BaseLinearVelocity: return "base_linear_velocity";
    case Term::BaseAngularVelocity: return "base_angular_velocity";
    case Term::FeetClearance: return "feet_clearance";
    case Term::Symmetry: return "symmetry";
    case Term::NominalPose: return "nominal_pose";
    case Term::Energy: return "energy";
    case Term::BaseAcceleration: return "base_acceleration";
    case Term::ContactChange: return "contact_change";
    case Term::MaintainContact: return "maintain_contact";
    case Term::ContactForces: return "contact_forces";
    case Term::ActionRate: return "action_rate";
    case Term::JointAcceleration: return "joint_acceleration";
    case Term::JointLimits: return "joint_limits";
  }
  throw std::invalid_argument("unknown reward term");
}

namespace {

double orientation_error_sq(const math::UnitQuaternion& a, const math::UnitQuaternion& b) {
  return math::quat_log_error(a, b).squaredNorm();
}

// symmetry pairs: (FL, FR) and (RL, RR), three joints each
double symmetry_error_sq(const Vector12d& q) {
  double sum = 0.0;
  for (int pair = 0; pair < 2; ++pair)
    for (int j = 0; j < 3; ++j) {
      const double d = q[6 * pair + j] - q[6 * pair + 3 + j];
      sum += d * d;
    }
  return sum;
}

}  // namespace

double evaluate_term(Term term, const RewardContext& ctx, const RewardWeights& w) {
  const Phase phase = ctx.phase;
  switch (term) {
    case Term::LandingPosition:
      if (!ctx.landing_eval) return 0.0;
      return w.w_landing_pos *
             exp_kernel((ctx.p_land - ctx.p_des).squaredNorm(), w.sigma_landing_pos);

    case Term::LandingOrientation:
      if (!ctx.landing_eval) return 0.0;
      return w.w_landing_ori *
             exp_kernel(orientation_error_sq(ctx.q_land, ctx.q_des), w.sigma_landing_ori);

    case Term::MaxHeight: {
      if (!ctx.landing_eval) return 0.0;
      const double err = ctx.h_max - kMaxHeightTarget;
      return w.w_max_height * exp_kernel(err * err, w.sigma_max_height);
    }

    case Term::Jumping:
      return ctx.landing_eval ? w.w_jump : 0.0;

    case Term::BasePosition:
      switch (phase) {
        case Phase::Stance: {
          const double err = ctx.p.z() - kStanceHeightTarget;
          return w.w_base_pos_stance * exp_kernel(err * err, w.sigma_base_pos_stance);
        }
        case Phase::Flight: {
          const double err = ctx.p.z() - kFlightHeightTarget;
          return w.w_base_pos_flight * exp_kernel(err * err, w.sigma_base_pos_flight);
        }
        case Phase::Landing:
          return w.w_base_pos_landing *
                 exp_kernel((ctx.p - ctx.p_des).squaredNorm(), w.sigma_base_pos_landing);
      }
      return 0.0;

    case Term::OrientationTracking:
      switch (phase) {
        case Phase::Stance:
          return w.w_ori_stance *
                 exp_kernel(orientation_error_sq(ctx.q_base, ctx.q_des), w.sigma_ori_stance);
        case Phase::Flight:
          return 0.0;
        case Phase::Landing:
          return w.w_ori_landing *
                 exp_kernel(orientation_error_sq(ctx.q_base, ctx.q_des), w.sigma_ori_landing);
      }
      return 0.0;

    case Term::BaseLinearVelocity: {
      if (phase != Phase::Flight) return 0.0;
      const Eigen::Vector2d err = ctx.v.head<2>() - ctx.v_des;
      return w.w_lin_vel * exp_kernel(err.squaredNorm(), w.sigma_lin_vel);
    }

    case Term::BaseAngularVelocity:
      switch (phase) {
        case Phase::Stance:
          return 0.0;
        case Phase::Flight:
          return w.w_ang_vel *
                 exp_kernel((ctx.omega - ctx.omega_des).squaredNorm(), w.sigma_ang_vel);
        case Phase::Landing:
          return 0.1 * w.w_ang_vel * exp_kernel(ctx.omega.squaredNorm(), w.sigma_ang_vel);
      }
      return 0.0;

    case Term::FeetClearance: {
      if (phase != Phase::Flight) return 0.0;
      double sum = 0.0;
      for (int leg = 0; leg < 4; ++leg) {
        const Eigen::Vector3d err =
            ctx.feet[leg] - ctx.feet_nom[leg] + Eigen::Vector3d(0.0, 0.0, -kFeetTuckOffset);
        sum += err.squaredNorm();
      }
      return w.w_feet_clearance * sum;
    }

    case Term::Symmetry:
      return w.w_symmetry * symmetry_error_sq(ctx.q);

    case Term::NominalPose: {
      const double kernel =
          exp_kernel((ctx.q - ctx.q_nom).squaredNorm(), w.sigma_nominal_pose);
      const double scale = phase == Phase::Flight ? 0.1 : 1.0;
      return scale * w.w_nominal_pose * kernel;
    }

    case Term::Energy:
      return w.w_energy * ctx.tau.dot(ctx.qd);

    case Term::BaseAcceleration:
      return w.w_base_acc * ctx.vdot.squaredNorm();

    case Term::ContactChange: {
      double sum = 0.0;
      for (int leg = 0; leg < 4; ++leg) sum += std::abs(ctx.contacts[leg] - ctx.contacts_prev[leg]);
      return w.w_contact_change * sum;
    }

    case Term::MaintainContact: {
      if (phase != Phase::Stance) return 0.0;
      double sum = 0.0;
      for (int leg = 0; leg < 4; ++leg) sum += ctx.contacts[leg];
      return w.w_maintain_contact * sum;
    }

    case Term::ContactForces: {
      Eigen::Vector3d mean = Eigen::Vector3d::Zero();
      for (const auto& f : ctx.foot_force) mean += f;
      mean /= 4.0;
      double sum = 0.0;
      for (const auto& f : ctx.foot_force) sum += (f - mean).norm();
      return w.w_contact_forces * sum;
    }

    case Term::ActionRate:
      return w.w_action_rate * (ctx.action - ctx.action_prev).squaredNorm();

    case Term::JointAcceleration:
      return w.w_joint_acc * ctx.qdd.squaredNorm();

    case Term::JointLimits: {
      double sum = 0.0;
      for (int i = 0; i < 12; ++i) {
        const double over = std::max(0.0, ctx.q[i] - ctx.soft_upper[i]) +
                            std::max(0.0, ctx.soft_lower[i] - ctx.q[i]);
        sum += over * over;
      }
      return w.w_joint_limits * sum;
    }
  }
  throw std::invalid_argument("unknown reward term");
}

double combine(double task_sum, const Eigen::VectorXd& penalties, double sigma_total) {
  if (sigma_total <= 0.0) throw std::invalid_argument("combine: sigma_total must be positive");
  return task_sum * std::exp(-penalties.squaredNorm() / sigma_total);
}

StepReward step_reward(const RewardContext& ctx, const RewardWeights& w) {
  constexpr std::array<Term, 10> kTaskRows = {
      Term::LandingPosition,    Term::LandingOrientation,  Term::MaxHeight,
      Term::Jumping,            Term::BasePosition,        Term::OrientationTracking,
      Term::BaseLinearVelocity, Term::BaseAngularVelocity, Term::NominalPose,
      Term::MaintainContact,
  };
  constexpr std::array<Term, 9> kPenaltyRows = {
      Term::FeetClearance,  Term::Symmetry,   Term::Energy,
      Term::BaseAcceleration, Term::ContactChange, Term::ContactForces,
      Term::ActionRate,     Term::JointAcceleration, Term::JointLimits,
  };

  StepReward out;
  for (Term t : kAllTerms) out.terms[static_cast<int>(t)] = evaluate_term(t, ctx, w);
  for (Term t : kTaskRows) out.task_sum += out.terms[static_cast<int>(t)];

  Eigen::VectorXd penalties(kPenaltyRows.size());
  for (size_t i = 0; i < kPenaltyRows.size(); ++i)
    penalties[i] = std::abs(out.terms[static_cast<int>(kPenaltyRows[i])]);
  out.penalty_sq_norm = penalties.squaredNorm();
  out.total = combine(out.task_sum, penalties, w.sigma_total);
  return out;
}

FlightTargets flight_targets(const Eigen::Vector3d& takeoff_pos, double takeoff_vz,
                             double takeoff_yaw, const Eigen::Vector3d& p_des, double yaw_des) {
  FlightTargets t;
  const double flight_time = 2.0 * std::max(takeoff_vz, 0.1) / 9.81;
  t.v_des = (p_des.head<2>() - takeoff_pos.head<2>()) / flight_time;
  double dyaw = yaw_des - takeoff_yaw;
  while (dyaw > M_PI) dyaw -= 2.0 * M_PI;
  while (dyaw < -M_PI) dyaw += 2.0 * M_PI;
  t.omega_des = {0.0, 0.0, dyaw / flight_time};
  return t;
}

}  // namespace qj::rewards
