#include <doctest.h>

#include <cmath>

#include "quadjump/math/rng.hpp"
#include "quadjump/rewards/rewards.hpp"

using namespace qj;
using namespace qj::rewards;
using env::Phase;
using math::UnitQuaternion;

namespace {

UnitQuaternion rand_quat(math::RngStream& rng) {
  Eigen::Vector3d axis(rng.normal(), rng.normal(), rng.normal());
  axis.normalize();
  return UnitQuaternion::from_rotvec(axis * rng.uniform(0.0, 2.5));
}

RewardContext random_context(math::RngStream& rng, Phase phase, bool landing_eval = false) {
  RewardContext ctx;
  ctx.phase = phase;
  ctx.landing_eval = landing_eval && phase == Phase::Landing;
  ctx.p = {rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(0.1, 1.0)};
  ctx.q_base = rand_quat(rng);
  ctx.v = {rng.normal(), rng.normal(), rng.normal()};
  ctx.omega = {rng.normal(), rng.normal(), rng.normal()};
  ctx.vdot = {rng.normal(), rng.normal(), rng.normal()};
  ctx.p_des = {rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(0.2, 0.4)};
  ctx.q_des = rand_quat(rng);
  ctx.v_des = {rng.normal(), rng.normal()};
  ctx.omega_des = {0, 0, rng.normal()};
  for (int i = 0; i < 12; ++i) {
    ctx.q[i] = rng.uniform(-2.0, 2.0);
    ctx.qd[i] = rng.normal() * 5;
    ctx.qdd[i] = rng.normal() * 50;
    ctx.q_nom[i] = rng.uniform(-1.5, 1.5);
    ctx.soft_lower[i] = -1.5;
    ctx.soft_upper[i] = 1.5;
    ctx.tau[i] = rng.normal() * 10;
    ctx.action[i] = rng.normal();
    ctx.action_prev[i] = rng.normal();
  }
  for (int leg = 0; leg < 4; ++leg) {
    ctx.contacts[leg] = rng.uniform() < 0.5;
    ctx.contacts_prev[leg] = rng.uniform() < 0.5;
    ctx.foot_force[leg] = {rng.normal() * 20, rng.normal() * 20, rng.uniform(0, 60)};
    ctx.feet[leg] = {rng.uniform(-0.3, 0.3), rng.uniform(-0.3, 0.3), rng.uniform(-0.35, 0.0)};
    ctx.feet_nom[leg] = {rng.uniform(-0.3, 0.3), rng.uniform(-0.3, 0.3), rng.uniform(-0.3, -0.2)};
  }
  ctx.p_land = {rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(0.2, 0.4)};
  ctx.q_land = rand_quat(rng);
  ctx.h_max = rng.uniform(0.3, 1.2);
  return ctx;
}

// deliberately straight-line scalar re-implementation of every table row;
// shares nothing with the engine besides <cmath>
double rotation_angle(const UnitQuaternion& a, const UnitQuaternion& b) {
  // conj(a) * b written out by hand, angle via atan2
  const double rw = a.w * b.w + a.x * b.x + a.y * b.y + a.z * b.z;
  const double rx = a.w * b.x - a.x * b.w - a.y * b.z + a.z * b.y;
  const double ry = a.w * b.y + a.x * b.z - a.y * b.w - a.z * b.x;
  const double rz = a.w * b.z - a.x * b.y + a.y * b.x - a.z * b.w;
  return 2.0 * std::atan2(std::sqrt(rx * rx + ry * ry + rz * rz), std::abs(rw));
}

double oracle_term(Term term, const RewardContext& c, const RewardWeights& w) {
  const bool stance = c.phase == Phase::Stance;
  const bool flight = c.phase == Phase::Flight;
  const bool landing = c.phase == Phase::Landing;
  switch (term) {
    case Term::LandingPosition: {
      if (!c.landing_eval) return 0;
      double e2 = 0;
      for (int k = 0; k < 3; ++k) e2 += (c.p_land[k] - c.p_des[k]) * (c.p_land[k] - c.p_des[k]);
      return w.w_landing_pos * std::exp(-e2 / w.sigma_landing_pos);
    }
    case Term::LandingOrientation: {
      if (!c.landing_eval) return 0;
      const double a = rotation_angle(c.q_land, c.q_des);
      return w.w_landing_ori * std::exp(-a * a / w.sigma_landing_ori);
    }
    case Term::MaxHeight: {
      if (!c.landing_eval) return 0;
      const double e = c.h_max - 0.9;
      return w.w_max_height * std::exp(-e * e / w.sigma_max_height);
    }
    case Term::Jumping:
      return c.landing_eval ? w.w_jump : 0;
    case Term::BasePosition: {
      if (stance) {
        const double e = c.p.z() - 0.20;
        return w.w_base_pos_stance * std::exp(-e * e / w.sigma_base_pos_stance);
      }
      if (flight) {
        const double e = c.p.z() - 0.7;
        return w.w_base_pos_flight * std::exp(-e * e / w.sigma_base_pos_flight);
      }
      double e2 = 0;
      for (int k = 0; k < 3; ++k) e2 += (c.p[k] - c.p_des[k]) * (c.p[k] - c.p_des[k]);
      return w.w_base_pos_landing * std::exp(-e2 / w.sigma_base_pos_landing);
    }
    case Term::OrientationTracking: {
      if (flight) return 0;
      const double a = rotation_angle(c.q_base, c.q_des);
      if (stance) return w.w_ori_stance * std::exp(-a * a / w.sigma_ori_stance);
      return w.w_ori_landing * std::exp(-a * a / w.sigma_ori_landing);
    }
    case Term::BaseLinearVelocity: {
      if (!flight) return 0;
      const double ex = c.v.x() - c.v_des.x(), ey = c.v.y() - c.v_des.y();
      return w.w_lin_vel * std::exp(-(ex * ex + ey * ey) / w.sigma_lin_vel);
    }
    case Term::BaseAngularVelocity: {
      if (stance) return 0;
      if (flight) {
        double e2 = 0;
        for (int k = 0; k < 3; ++k) e2 += (c.omega[k] - c.omega_des[k]) * (c.omega[k] - c.omega_des[k]);
        return w.w_ang_vel * std::exp(-e2 / w.sigma_ang_vel);
      }
      double e2 = 0;
      for (int k = 0; k < 3; ++k) e2 += c.omega[k] * c.omega[k];
      return 0.1 * w.w_ang_vel * std::exp(-e2 / w.sigma_ang_vel);
    }
    case Term::FeetClearance: {
      if (!flight) return 0;
      double sum = 0;
      for (int leg = 0; leg < 4; ++leg) {
        const double dx = c.feet[leg].x() - c.feet_nom[leg].x();
        const double dy = c.feet[leg].y() - c.feet_nom[leg].y();
        const double dz = c.feet[leg].z() - c.feet_nom[leg].z() - 0.15;
        sum += dx * dx + dy * dy + dz * dz;
      }
      return w.w_feet_clearance * sum;
    }
    case Term::Symmetry: {
      double sum = 0;
      for (int j = 0; j < 3; ++j) {
        const double f = c.q[j] - c.q[3 + j];
        const double r = c.q[6 + j] - c.q[9 + j];
        sum += f * f + r * r;
      }
      return w.w_symmetry * sum;
    }
    case Term::NominalPose: {
      double e2 = 0;
      for (int j = 0; j < 12; ++j) e2 += (c.q[j] - c.q_nom[j]) * (c.q[j] - c.q_nom[j]);
      const double kernel = std::exp(-e2 / w.sigma_nominal_pose);
      return (flight ? 0.1 : 1.0) * w.w_nominal_pose * kernel;
    }
    case Term::Energy: {
      double dot = 0;
      for (int j = 0; j < 12; ++j) dot += c.tau[j] * c.qd[j];
      return w.w_energy * dot;
    }
    case Term::BaseAcceleration:
      return w.w_base_acc *
             (c.vdot.x() * c.vdot.x() + c.vdot.y() * c.vdot.y() + c.vdot.z() * c.vdot.z());
    case Term::ContactChange: {
      double sum = 0;
      for (int leg = 0; leg < 4; ++leg) sum += std::abs(c.contacts[leg] - c.contacts_prev[leg]);
      return w.w_contact_change * sum;
    }
    case Term::MaintainContact: {
      if (!stance) return 0;
      return w.w_maintain_contact *
             (c.contacts[0] + c.contacts[1] + c.contacts[2] + c.contacts[3]);
    }
    case Term::ContactForces: {
      double mx = 0, my = 0, mz = 0;
      for (int leg = 0; leg < 4; ++leg) {
        mx += c.foot_force[leg].x() / 4;
        my += c.foot_force[leg].y() / 4;
        mz += c.foot_force[leg].z() / 4;
      }
      double sum = 0;
      for (int leg = 0; leg < 4; ++leg) {
        const double dx = c.foot_force[leg].x() - mx;
        const double dy = c.foot_force[leg].y() - my;
        const double dz = c.foot_force[leg].z() - mz;
        sum += std::sqrt(dx * dx + dy * dy + dz * dz);
      }
      return w.w_contact_forces * sum;
    }
    case Term::ActionRate: {
      double sum = 0;
      for (int j = 0; j < 12; ++j) {
        const double d = c.action[j] - c.action_prev[j];
        sum += d * d;
      }
      return w.w_action_rate * sum;
    }
    case Term::JointAcceleration: {
      double sum = 0;
      for (int j = 0; j < 12; ++j) sum += c.qdd[j] * c.qdd[j];
      return w.w_joint_acc * sum;
    }
    case Term::JointLimits: {
      double sum = 0;
      for (int j = 0; j < 12; ++j) {
        double over = 0;
        if (c.q[j] > c.soft_upper[j]) over = c.q[j] - c.soft_upper[j];
        if (c.q[j] < c.soft_lower[j]) over = c.soft_lower[j] - c.q[j];
        sum += over * over;
      }
      return w.w_joint_limits * sum;
    }
  }
  return 0;
}

}  // namespace

TEST_CASE("every table row matches the straight-line oracle") {
  math::RngStream rng(71, 0);
  RewardWeights w;
  // exercise non-default weights too
  w.w_jump = 17.0;
  w.sigma_lin_vel = 0.7;
  w.w_energy = 3e-3;
  const Phase phases[] = {Phase::Stance, Phase::Flight, Phase::Landing};
  for (int trial = 0; trial < 300; ++trial) {
    const Phase phase = phases[trial % 3];
    const RewardContext ctx = random_context(rng, phase, trial % 2 == 0);
    for (Term t : kAllTerms) {
      const double got = evaluate_term(t, ctx, w);
      const double want = oracle_term(t, ctx, w);
      CHECK(std::abs(got - want) <= 1e-9 * std::max(1.0, std::abs(want)));
    }
  }
}

TEST_CASE("cells printed as zero return exactly zero") {
  math::RngStream rng(73, 0);
  struct ZeroCell {
    Term term;
    Phase phase;
  };
  const ZeroCell zero_cells[] = {
      {Term::LandingPosition, Phase::Stance},   {Term::LandingPosition, Phase::Flight},
      {Term::LandingOrientation, Phase::Stance}, {Term::LandingOrientation, Phase::Flight},
      {Term::MaxHeight, Phase::Stance},         {Term::MaxHeight, Phase::Flight},
      {Term::Jumping, Phase::Stance},           {Term::Jumping, Phase::Flight},
      {Term::OrientationTracking, Phase::Flight},
      {Term::BaseLinearVelocity, Phase::Stance}, {Term::BaseLinearVelocity, Phase::Landing},
      {Term::BaseAngularVelocity, Phase::Stance},
      {Term::FeetClearance, Phase::Stance},     {Term::FeetClearance, Phase::Landing},
      {Term::MaintainContact, Phase::Flight},   {Term::MaintainContact, Phase::Landing},
  };
  RewardWeights w;
  for (int trial = 0; trial < 200; ++trial)
    for (const auto& cell : zero_cells) {
      const RewardContext ctx = random_context(rng, cell.phase, true);
      CHECK(evaluate_term(cell.term, ctx, w) == 0.0);
    }
}

TEST_CASE("single rows pay only at the landing-evaluation step") {
  math::RngStream rng(79, 0);
  RewardWeights w;
  const RewardContext not_eval = random_context(rng, Phase::Landing, false);
  for (Term t : {Term::LandingPosition, Term::LandingOrientation, Term::MaxHeight, Term::Jumping})
    CHECK(evaluate_term(t, not_eval, w) == 0.0);
  RewardContext eval = random_context(rng, Phase::Landing, true);
  eval.h_max = 0.9;
  CHECK(evaluate_term(Term::MaxHeight, eval, w) == doctest::Approx(w.w_max_height).epsilon(1e-12));
  CHECK(evaluate_term(Term::Jumping, eval, w) == w.w_jump);
}

TEST_CASE("combine rule and properties") {
  CHECK(combine(2.0, Eigen::VectorXd::Zero(5), 1.0) == 2.0);
  Eigen::VectorXd r(1);
  r[0] = 1.0;
  CHECK(combine(1.0, r, 1.0) == doctest::Approx(0.36788).epsilon(1e-4));
  CHECK(combine(0.0, r, 1.0) == 0.0);
  CHECK_THROWS_AS(combine(1.0, r, 0.0), std::invalid_argument);

  math::RngStream rng(83, 0);
  for (int i = 0; i < 10000; ++i) {
    const double task = rng.uniform(0, 5);
    Eigen::VectorXd pen(4);
    for (int k = 0; k < 4; ++k) pen[k] = rng.uniform(0, 2);
    const double sigma = rng.uniform(0.1, 4.0);
    const double direct = task * std::exp(-(pen[0] * pen[0] + pen[1] * pen[1] +
                                            pen[2] * pen[2] + pen[3] * pen[3]) / sigma);
    CHECK(std::abs(combine(task, pen, sigma) - direct) <= 1e-12);
    CHECK(combine(task, pen, sigma) >= 0.0);
  }
}

TEST_CASE("quiet standing decomposes into the four stance bonuses") {
  RewardWeights w;
  RewardContext ctx;  // all zeros
  ctx.phase = Phase::Stance;
  ctx.p = {0, 0, 0.20};
  ctx.q_des = ctx.q_base;
  for (int leg = 0; leg < 4; ++leg) {
    ctx.contacts[leg] = 1;
    ctx.contacts_prev[leg] = 1;
    ctx.foot_force[leg] = {0, 0, 29.43};
  }
  const StepReward r = step_reward(ctx, w);
  const double expected =
      w.w_base_pos_stance + w.w_ori_stance + w.w_nominal_pose + 4 * w.w_maintain_contact;
  CHECK(r.task_sum == doctest::Approx(expected).epsilon(1e-12));
  CHECK(r.penalty_sq_norm == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(r.total == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("identical consecutive actions cost no action-rate penalty") {
  math::RngStream rng(89, 0);
  RewardWeights w;
  RewardContext ctx = random_context(rng, Phase::Stance);
  ctx.action_prev = ctx.action;
  CHECK(evaluate_term(Term::ActionRate, ctx, w) == 0.0);
}

TEST_CASE("kernel rows stay within [0, w] and the total is nonnegative") {
  math::RngStream rng(97, 0);
  RewardWeights w;
  const Phase phases[] = {Phase::Stance, Phase::Flight, Phase::Landing};
  for (int i = 0; i < 500; ++i) {
    const RewardContext ctx = random_context(rng, phases[i % 3], i % 2 == 0);
    const StepReward r = step_reward(ctx, w);
    CHECK(r.total >= 0.0);
    CHECK(r.terms[static_cast<int>(Term::BasePosition)] <=
          std::max({w.w_base_pos_stance, w.w_base_pos_flight, w.w_base_pos_landing}) + 1e-12);
    CHECK(r.terms[static_cast<int>(Term::NominalPose)] <= w.w_nominal_pose + 1e-12);
    CHECK(r.terms[static_cast<int>(Term::BaseAngularVelocity)] >= 0.0);
  }
}

TEST_CASE("energy example and sign behaviour") {
  RewardWeights w;
  w.w_energy = 1.0;
  RewardContext ctx;
  ctx.tau[0] = 1.0;
  ctx.qd[0] = 2.0;
  CHECK(evaluate_term(Term::Energy, ctx, w) == doctest::Approx(2.0).epsilon(1e-12));
  ctx.qd[0] = -2.0;  // negative work is signed here, magnitude enters the penalty vector
  CHECK(evaluate_term(Term::Energy, ctx, w) == doctest::Approx(-2.0).epsilon(1e-12));
  const StepReward r = step_reward(ctx, w);
  CHECK(r.penalty_sq_norm == doctest::Approx(4.0).epsilon(1e-9));
}

TEST_CASE("flight targets: ballistic arithmetic") {
  // take-off vz chosen so the flight time is exactly 0.5 s at g = 9.81
  const auto t0 = flight_targets({0.3, -0.1, 0.5}, 2.4525, 0.0, {0.8, -0.1, 0.3}, 0.0);
  CHECK(t0.v_des.x() == doctest::Approx(1.0).epsilon(1e-9));  // 0.5 m over 0.5 s
  CHECK(t0.v_des.y() == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(t0.omega_des.z() == 0.0);

  const auto below = flight_targets({0.2, 0.1, 0.6}, 1.5, 0.3, {0.2, 0.1, 0.3}, 0.3);
  CHECK(below.v_des.norm() == doctest::Approx(0.0).epsilon(1e-12));

  // weak take-off clamps the flight time at 2*0.1/g
  const auto weak = flight_targets({0, 0, 0.3}, 0.0, 0.0, {0.1, 0, 0.3}, 0.0);
  CHECK(weak.v_des.x() == doctest::Approx(0.1 / (0.2 / 9.81)).epsilon(1e-9));

  const auto yawed = flight_targets({0, 0, 0.3}, 2.4525, 0.1, {0, 0, 0.3}, 0.6);
  CHECK(yawed.omega_des.z() == doctest::Approx(1.0).epsilon(1e-9));
}
