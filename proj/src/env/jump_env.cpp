#include "quadjump/env/jump_env.hpp"

#include <cmath>

namespace qj::env {

const char* to_string(EpisodeOutcome::Cause c) {
  using Cause = EpisodeOutcome::Cause;
  switch (c) {
    case Cause::None: return "none";
    case Cause::Collision: return "collision";
    case Cause::LowHeight: return "low_height";
    case Cause::Orientation: return "orientation";
    case Cause::LandingError: return "landing_error";
    case Cause::Timeout: return "timeout";
    case Cause::Diverged: return "diverged";
  }
  return "?";
}

namespace {
// fixed observation scaling, applied at flatten time
constexpr double kVelScale = 0.5;
constexpr double kOmegaScale = 0.25;
constexpr double kJointVelScale = 0.05;
}  // namespace

Eigen::VectorXf ObservationHistory::flatten(const Vector12d& q_nom) const {
  Eigen::VectorXf out(flat_dim());
  int at = 0;
  for (const StepRecord& r : records) {
    for (int k = 0; k < 3; ++k) out[at++] = static_cast<float>(r.v[k] * kVelScale);
    for (int k = 0; k < 3; ++k) out[at++] = static_cast<float>(r.omega[k] * kOmegaScale);
    for (int k = 0; k < 12; ++k) out[at++] = static_cast<float>(r.q[k] - q_nom[k]);
    for (int k = 0; k < 12; ++k) out[at++] = static_cast<float>(r.qd[k] * kJointVelScale);
    for (int k = 0; k < 12; ++k) out[at++] = static_cast<float>(r.action_prev[k]);
    for (int k = 0; k < 4; ++k) out[at++] = static_cast<float>(r.quat[k]);
    for (int k = 0; k < 4; ++k) out[at++] = static_cast<float>(r.contacts[k]);
  }
  for (int k = 0; k < 13; ++k) out[at++] = static_cast<float>(goal[k]);
  out[at++] = static_cast<float>(toggle);
  return out;
}

Vector12d ema_filter(const Vector12d& prev_filtered, const Vector12d& raw, double alpha) {
  return alpha * raw + (1.0 - alpha) * prev_filtered;
}

Phase detect_phase(Phase current, const std::array<int, 4>& contacts, bool toggle,
                   int& contact_free_steps, int k_required) {
  const bool airborne = !contacts[0] && !contacts[1] && !contacts[2] && !contacts[3];
  switch (current) {
    case Phase::Stance:
      if (!toggle) {
        contact_free_steps = 0;
        return Phase::Stance;
      }
      contact_free_steps = airborne ? contact_free_steps + 1 : 0;
      return contact_free_steps >= k_required ? Phase::Flight : Phase::Stance;
    case Phase::Flight:
      return airborne ? Phase::Flight : Phase::Landing;
    case Phase::Landing:
      return Phase::Landing;
  }
  return current;
}

std::optional<EpisodeOutcome::Cause> check_termination(
    const phys::SimState& state, const robot::RobotModel& model, const phys::Terrain& terrain,
    Phase phase, const Eigen::Vector3d& p_des_world, const math::UnitQuaternion& q_des_world,
    double time, const EnvConfig& cfg) {
  using Cause = EpisodeOutcome::Cause;
  if (phys::check_body_collision(model, {state.base_pos, state.base_quat}, state.q, terrain))
    return Cause::Collision;
  if (state.base_pos.z() < cfg.low_height_threshold) return Cause::LowHeight;
  if (math::quat_log_error(state.base_quat, q_des_world).norm() > cfg.orientation_threshold)
    return Cause::Orientation;
  if (phase == Phase::Landing &&
      (state.base_pos.head<2>() - p_des_world.head<2>()).norm() > cfg.landing_error_gate)
    return Cause::LandingError;
  if (time >= cfg.episode_seconds - 0.5 * cfg.control_dt) return Cause::Timeout;
  return std::nullopt;
}

std::optional<RsiSample> maybe_sample_rsi(const EnvConfig& cfg, math::RngStream& rng) {
  if (cfg.rsi_fraction <= 0.0) return std::nullopt;
  if (rng.uniform() >= cfg.rsi_fraction) return std::nullopt;
  RsiSample s;
  s.height = rng.uniform(cfg.rsi_height_lo, cfg.rsi_height_hi);
  s.upward_velocity = rng.uniform(cfg.rsi_vz_lo, cfg.rsi_vz_hi);
  return s;
}

JumpEnv::JumpEnv(const robot::RobotModel& model, const EnvConfig& cfg,
                 const phys::ActuatorConfig& actuator, const phys::ContactParams& contact,
                 const rewards::RewardWeights& weights, uint64_t seed, uint64_t env_id)
    : nominal_model_(model),
      cfg_(cfg),
      nominal_actuator_(actuator),
      nominal_contact_(contact),
      weights_(weights),
      rng_(seed, 100 + env_id) {
  feet_nom_base_ = robot::feet_in_base(model, model.q_nom);
}

const ObservationHistory& JumpEnv::reset(const Command& command, const phys::Terrain& terrain,
                                         const domainrand::RandomizationDraw& draw,
                                         const std::optional<RsiSample>& rsi) {
  command_ = command;
  setup_ = domainrand::apply_draw(nominal_model_, nominal_actuator_, nominal_contact_, draw);
  setup_.contact.dt = cfg_.control_dt / cfg_.sim_substeps;
  sim_ = std::make_unique<phys::Simulator>(setup_.model, setup_.actuator, setup_.contact, terrain,
                                           cfg_.control_dt / cfg_.sim_substeps);

  phys::SimState state;
  state.q = nominal_model_.q_nom;
  rsi_active_ = rsi.has_value();
  state.base_pos = {0, 0, rsi ? rsi->height : nominal_model_.standing_height()};
  if (rsi) state.v = {0, 0, rsi->upward_velocity};
  sim_->reset(state);

  if (phys::check_body_collision(nominal_model_, {state.base_pos, state.base_quat}, state.q,
                                 terrain))
    throw std::runtime_error("jump_env: initial pose collides with the terrain");

  // command frame: reset yaw and ground point under the base
  const double stand_z = nominal_model_.standing_height();
  p_des_world_ = Eigen::Vector3d(command.dp_des.x(), command.dp_des.y(), stand_z + command.dp_des.z());
  q_des_world_ = command.dq_des;
  yaw_des_world_ = q_des_world_.yaw();

  phase_ = Phase::Stance;
  contact_free_steps_ = 0;
  step_count_ = 0;
  done_ = false;
  outcome_ = EpisodeOutcome{};
  filtered_action_.setZero();
  raw_action_prev_.setZero();
  contacts_prev_ = sim_->state().contacts;
  flight_targets_ = rewards::FlightTargets{};
  v_world_prev_ = sim_->state().v_world();
  recent_base_positions_.clear();
  recent_yaws_.clear();
  h_max_ = state.base_pos.z();

  history_.records.clear();
  const StepRecord first = make_record(Vector12d::Zero());
  for (int i = 0; i < cfg_.history_steps; ++i) history_.records.push_back(first);
  history_.goal = command.goal();
  history_.toggle = toggle_active() ? 1.0 : 0.0;
  return history_;
}

bool JumpEnv::toggle_active() const {
  if (rsi_active_) return true;  // the jump is already in progress
  if (cfg_.toggle_immediately) return true;
  return step_count_ >= static_cast<int>(cfg_.settle_seconds / cfg_.control_dt + 0.5);
}

StepRecord JumpEnv::make_record(const Vector12d& prev_action) const {
  const phys::SimState& s = sim_->state();
  StepRecord r;
  r.v = s.v;
  r.omega = s.omega;
  r.q = s.q + setup_.joint_obs_offsets;
  r.qd = s.qd;
  r.action_prev = prev_action;
  r.quat = s.base_quat.coeffs_wxyz();
  for (int leg = 0; leg < 4; ++leg) r.contacts[leg] = s.contacts[leg];
  return r;
}

void JumpEnv::push_record(const Vector12d& prev_action) {
  history_.records.pop_front();
  history_.records.push_back(make_record(prev_action));
  history_.toggle = toggle_active() ? 1.0 : 0.0;
}

rewards::RewardContext JumpEnv::make_context() const {
  const phys::SimState& s = sim_->state();
  rewards::RewardContext ctx;
  ctx.phase = phase_;
  ctx.p = s.base_pos;
  ctx.q_base = s.base_quat;
  ctx.v = s.v_world();
  ctx.omega = s.omega_world();
  ctx.vdot = (ctx.v - v_world_prev_) / cfg_.control_dt;
  ctx.p_des = p_des_world_;
  ctx.q_des = q_des_world_;
  ctx.v_des = flight_targets_.v_des;
  ctx.omega_des = flight_targets_.omega_des;
  ctx.q = s.q;
  ctx.qd = s.qd;
  ctx.qdd = s.qdd;
  ctx.q_nom = nominal_model_.q_nom;
  ctx.soft_lower = nominal_model_.soft_lower_limits();
  ctx.soft_upper = nominal_model_.soft_upper_limits();
  ctx.tau = s.tau;
  ctx.action = raw_action_prev_;  // set by step() before evaluation
  ctx.contacts = s.contacts;
  ctx.contacts_prev = contacts_prev_;
  ctx.foot_force = s.foot_force;
  const auto feet_world = sim_->foot_positions();
  for (int leg = 0; leg < 4; ++leg)
    ctx.feet[leg] = s.base_quat.rotate_inverse(feet_world[leg] - s.base_pos);
  ctx.feet_nom = feet_nom_base_;
  ctx.p_land = outcome_.landed ? Eigen::Vector3d(recent_base_positions_.back()) : s.base_pos;
  ctx.q_land = s.base_quat;
  ctx.h_max = h_max_;
  return ctx;
}

void JumpEnv::finalize_outcome(EpisodeOutcome::Cause cause) {
  using Cause = EpisodeOutcome::Cause;
  outcome_.cause = cause;
  outcome_.terminated = cause != Cause::Timeout && cause != Cause::None;
  outcome_.h_max = h_max_;
  if (outcome_.landed && !recent_base_positions_.empty()) {
    Eigen::Vector3d mean = Eigen::Vector3d::Zero();
    for (const auto& p : recent_base_positions_) mean += p;
    mean /= static_cast<double>(recent_base_positions_.size());
    outcome_.landing_pos_error = (mean.head<2>() - p_des_world_.head<2>()).norm();
    double yaw_sum = 0.0;
    for (double y : recent_yaws_) yaw_sum += y;
    double dyaw = yaw_sum / recent_yaws_.size() - yaw_des_world_;
    while (dyaw > M_PI) dyaw -= 2.0 * M_PI;
    while (dyaw < -M_PI) dyaw += 2.0 * M_PI;
    outcome_.landing_yaw_error = std::abs(dyaw);
  }
  done_ = true;
}

StepResult JumpEnv::step(const Vector12d& raw_action) {
  if (done_) throw std::logic_error("jump_env: step() called on a finished episode");

  StepResult result;
  if (!raw_action.allFinite()) {
    // aborted episode; the caller logs the incident
    finalize_outcome(EpisodeOutcome::Cause::Diverged);
    outcome_.terminated = true;
    result.done = true;
    result.phase = phase_;
    return result;
  }

  // action pipeline: EMA filter, scale, add q_nom, clip to the feasibility
  // window around the current joint position
  filtered_action_ = ema_filter(filtered_action_, raw_action, cfg_.ema_alpha());
  const Vector12d q_now = sim_->state().q;
  const Vector12d lower = nominal_model_.lower_limits().cwiseMax(
      q_now - Vector12d::Constant(cfg_.action_clip_window));
  const Vector12d upper = nominal_model_.upper_limits().cwiseMin(
      q_now + Vector12d::Constant(cfg_.action_clip_window));
  const Vector12d q_des = (nominal_model_.q_nom + cfg_.action_scale * filtered_action_)
                              .cwiseMax(lower)
                              .cwiseMin(upper);

  last_q_des_ = q_des;
  const int delay = domainrand::per_step_latency_steps(
      rng_, setup_.episodic_latency_ms, setup_.per_step_jitter_bound_ms, sim_->dt());
  sim_->queue_command(q_des, delay);

  v_world_prev_ = sim_->state().v_world();
  bool diverged = false;
  for (int sub = 0; sub < cfg_.sim_substeps && !diverged; ++sub) {
    try {
      sim_->step();
    } catch (const phys::SimDivergence&) {
      diverged = true;
    }
  }
  ++step_count_;
  h_max_ = std::max(h_max_, sim_->state().base_pos.z());

  if (diverged) {
    finalize_outcome(EpisodeOutcome::Cause::Diverged);
    outcome_.terminated = true;
    push_record(raw_action);
    result.done = true;
    result.phase = phase_;
    return result;
  }

  // phase machine; flight targets freeze at take-off
  const Phase prev_phase = phase_;
  phase_ = detect_phase(phase_, sim_->state().contacts, toggle_active(), contact_free_steps_,
                        cfg_.flight_contact_free_steps);
  if (prev_phase == Phase::Stance && phase_ == Phase::Flight) {
    const phys::SimState& s = sim_->state();
    flight_targets_ = rewards::flight_targets(s.base_pos, s.v_world().z(), s.base_quat.yaw(),
                                              p_des_world_, yaw_des_world_);
  }
  const bool landing_eval = prev_phase == Phase::Flight && phase_ == Phase::Landing;
  if (landing_eval) outcome_.landed = true;

  if (phase_ == Phase::Landing) {
    recent_base_positions_.push_back(sim_->state().base_pos);
    recent_yaws_.push_back(sim_->state().base_quat.yaw());
    const size_t window =
        static_cast<size_t>(cfg_.settle_window_seconds / cfg_.control_dt + 0.5);
    while (recent_base_positions_.size() > window) {
      recent_base_positions_.pop_front();
      recent_yaws_.pop_front();
    }
  }

  // reward
  rewards::RewardContext ctx = make_context();
  ctx.action = raw_action;
  ctx.action_prev = raw_action_prev_;
  ctx.landing_eval = landing_eval;
  if (landing_eval) {
    ctx.p_land = sim_->state().base_pos;
    ctx.q_land = sim_->state().base_quat;
  }
  result.breakdown = rewards::step_reward(ctx, weights_);
  result.reward = result.breakdown.total;

  const auto cause = check_termination(sim_->state(), nominal_model_, sim_->terrain(), phase_,
                                       p_des_world_, q_des_world_,
                                       step_count_ * cfg_.control_dt, cfg_);
  if (cause) finalize_outcome(*cause);

  contacts_prev_ = sim_->state().contacts;
  raw_action_prev_ = raw_action;
  push_record(raw_action);
  result.done = done_;
  result.phase = phase_;
  return result;
}

}  // namespace qj::env
