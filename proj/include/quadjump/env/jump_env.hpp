#pragma once

#include <deque>
#include <memory>
#include <optional>

#include "quadjump/domainrand/domain_rand.hpp"
#include "quadjump/env/command.hpp"
#include "quadjump/env/phase.hpp"
#include "quadjump/math/rng.hpp"
#include "quadjump/physics/collision.hpp"
#include "quadjump/physics/simulator.hpp"
#include "quadjump/rewards/rewards.hpp"

namespace qj::env {

struct EnvConfig {
  double control_dt = 0.02;           // 50 Hz policy
  int sim_substeps = 4;               // 200 Hz physics
  int history_steps = 20;             // N
  int flight_contact_free_steps = 5;  // K
  double action_scale = 0.5;          // rad per unit of filtered action
  double action_clip_window = 1.7;    // feasibility window around current q [rad]
  double filter_cutoff_hz = 5.0;
  double episode_seconds = 4.0;
  double settle_seconds = 0.5;        // jump toggle delay during training
  bool toggle_immediately = false;    // evaluation convention
  double rsi_fraction = 0.25;         // Stage I resets started mid-jump
  double rsi_height_lo = 0.30, rsi_height_hi = 0.80;
  double rsi_vz_lo = 0.5, rsi_vz_hi = 3.0;
  double landing_error_gate = 0.15;   // [m]
  double low_height_threshold = 0.12; // [m]
  double orientation_threshold = 3.0; // [rad]
  double settle_window_seconds = 0.1; // landing-error averaging window

  int episode_steps() const { return static_cast<int>(episode_seconds / control_dt + 0.5); }
  double ema_alpha() const {
    const double tau = 1.0 / (2.0 * M_PI * filter_cutoff_hz);
    return control_dt / (tau + control_dt);
  }
};

// One per-step observation record; values are raw (scaling happens when the
// history is flattened for the policy).
struct StepRecord {
  Eigen::Vector3d v{0, 0, 0};          // base frame
  Eigen::Vector3d omega{0, 0, 0};      // base frame
  Vector12d q = Vector12d::Zero();     // with encoder offsets
  Vector12d qd = Vector12d::Zero();
  Vector12d action_prev = Vector12d::Zero();
  Eigen::Vector4d quat{1, 0, 0, 0};    // wxyz
  Eigen::Vector4d contacts{0, 0, 0, 0};
};
constexpr int kRecordDim = 50;
constexpr int kGoalDim = 14;  // g (13) + jump toggle

// Ring of the last N records plus the command block.
struct ObservationHistory {
  std::deque<StepRecord> records;  // oldest first
  GoalVector goal = GoalVector::Zero();
  double toggle = 0.0;

  int flat_dim() const { return kRecordDim * static_cast<int>(records.size()) + kGoalDim; }
  // scaled, flattened observation for the policy
  Eigen::VectorXf flatten(const Vector12d& q_nom) const;
};

// y = alpha * raw + (1 - alpha) * prev; the 5 Hz cutoff at 50 Hz control
// gives alpha = 0.3859.
Vector12d ema_filter(const Vector12d& prev_filtered, const Vector12d& raw, double alpha);

// Stance until the toggle fires and K contact-free steps accumulate;
// Landing on the first contact in Flight; Landing is absorbing.
Phase detect_phase(Phase current, const std::array<int, 4>& contacts, bool toggle,
                   int& contact_free_steps, int k_required);

// First matching cause in the order collision, low height, orientation,
// landing error (Landing phase only), timeout.
std::optional<EpisodeOutcome::Cause> check_termination(
    const phys::SimState& state, const robot::RobotModel& model, const phys::Terrain& terrain,
    Phase phase, const Eigen::Vector3d& p_des_world, const math::UnitQuaternion& q_des_world,
    double time, const EnvConfig& cfg);

struct RsiSample {
  double height = 0.0;
  double upward_velocity = 0.0;
};

std::optional<RsiSample> maybe_sample_rsi(const EnvConfig& cfg, math::RngStream& rng);

struct StepResult {
  double reward = 0.0;
  bool done = false;
  rewards::StepReward breakdown;
  Phase phase = Phase::Stance;
};

// Goal-conditioned jumping environment. One instance per worker; owns its
// simulator, randomization, history, and RNG stream.
class JumpEnv {
 public:
  JumpEnv(const robot::RobotModel& model, const EnvConfig& cfg,
          const phys::ActuatorConfig& actuator, const phys::ContactParams& contact,
          const rewards::RewardWeights& weights, uint64_t seed, uint64_t env_id);

  // Poses the robot standing at q_nom (or airborne per the RSI sample),
  // applies the randomization draw, and pre-fills the history with the
  // reset record. Throws std::runtime_error if the initial pose collides
  // with the terrain.
  const ObservationHistory& reset(const Command& command, const phys::Terrain& terrain,
                                  const domainrand::RandomizationDraw& draw,
                                  const std::optional<RsiSample>& rsi = std::nullopt);

  StepResult step(const Vector12d& raw_action);

  const ObservationHistory& observation() const { return history_; }
  Eigen::VectorXf flat_observation() const { return history_.flatten(nominal_model_.q_nom); }
  const EpisodeOutcome& outcome() const { return outcome_; }
  const phys::SimState& sim_state() const { return sim_->state(); }
  const robot::RobotModel& model() const { return nominal_model_; }
  const EnvConfig& config() const { return cfg_; }
  bool done() const { return done_; }
  Phase phase() const { return phase_; }
  int steps_taken() const { return step_count_; }
  const Vector12d& last_command() const { return last_q_des_; }
  const Eigen::Vector3d& target_position() const { return p_des_world_; }
  math::RngStream& rng() { return rng_; }

  int obs_dim() const { return kRecordDim * cfg_.history_steps + kGoalDim; }
  static constexpr int action_dim() { return 12; }

 private:
  void push_record(const Vector12d& prev_action);
  StepRecord make_record(const Vector12d& prev_action) const;
  rewards::RewardContext make_context() const;
  bool toggle_active() const;
  void finalize_outcome(EpisodeOutcome::Cause cause);

  robot::RobotModel nominal_model_;
  EnvConfig cfg_;
  phys::ActuatorConfig nominal_actuator_;
  phys::ContactParams nominal_contact_;
  rewards::RewardWeights weights_;
  math::RngStream rng_;

  std::unique_ptr<phys::Simulator> sim_;
  domainrand::EpisodeSetup setup_;
  Command command_;
  ObservationHistory history_;

  Phase phase_ = Phase::Stance;
  int contact_free_steps_ = 0;
  int step_count_ = 0;
  bool done_ = true;
  bool rsi_active_ = false;
  EpisodeOutcome outcome_;

  Eigen::Vector3d p_des_world_{0, 0, 0};
  math::UnitQuaternion q_des_world_;
  double yaw_des_world_ = 0.0;

  Vector12d filtered_action_ = Vector12d::Zero();
  Vector12d last_q_des_ = Vector12d::Zero();
  Vector12d raw_action_prev_ = Vector12d::Zero();
  std::array<int, 4> contacts_prev_{};
  rewards::FlightTargets flight_targets_;
  std::array<Eigen::Vector3d, 4> feet_nom_base_;
  Eigen::Vector3d v_world_prev_{0, 0, 0};
  std::deque<Eigen::Vector3d> recent_base_positions_;
  std::deque<double> recent_yaws_;
  double h_max_ = 0.0;
};

}  // namespace qj::env
