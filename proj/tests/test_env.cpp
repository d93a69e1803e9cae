#include <doctest.h>

#include <cmath>

#include "quadjump/env/hopper_env.hpp"
#include "quadjump/env/jump_env.hpp"

using namespace qj;
using namespace qj::env;

namespace {

const char* kModelPath = QJ_SOURCE_DIR "/assets/quadruped_12kg.json";

robot::RobotModel the_model() {
  static robot::RobotModel model = robot::load_model(kModelPath);
  return model;
}

JumpEnv make_env(const EnvConfig& cfg, uint64_t seed = 7, uint64_t env_id = 0) {
  return JumpEnv(the_model(), cfg, phys::ActuatorConfig{}, phys::ContactParams{},
                 rewards::RewardWeights{}, seed, env_id);
}

domainrand::RandomizationDraw nominal_draw() { return {}; }

}  // namespace

TEST_CASE("observation is exactly 1014-dimensional in every stage") {
  EnvConfig cfg;
  JumpEnv e = make_env(cfg);

  Command stage1;  // in place
  e.reset(stage1, phys::Terrain{}, nominal_draw());
  CHECK(e.obs_dim() == 1014);
  CHECK(e.flat_observation().size() == 1014);

  Command stage2;
  stage2.dp_des = {0.6, 0.1, 0.0};
  stage2.dq_des = math::UnitQuaternion::from_yaw(0.2);
  e.reset(stage2, phys::Terrain{}, nominal_draw());
  auto obs2 = e.flat_observation();
  CHECK(obs2.size() == 1014);
  // obstacle block (last 7 entries before the toggle) is zeroed, not removed
  for (int k = 1007; k < 1013; ++k) CHECK(obs2[k] == 0.f);

  Command stage3 = stage2;
  stage3.has_obstacle = true;
  stage3.p_obs = {0.5, 0.0, 0.05};
  stage3.dim_obs = {0.1, 0.8, 0.3};
  phys::Obstacle obs;
  obs.center = {0.5, 0.0, 0.05};
  obs.length = 0.3;
  obs.width = 0.8;
  obs.height = 0.1;
  e.reset(stage3, phys::make_obstacle_terrain(obs), nominal_draw());
  CHECK(e.flat_observation().size() == 1014);
  CHECK(e.flat_observation()[1007] != 0.f);
}

TEST_CASE("ema filter: step response, fixed point, dc gain") {
  EnvConfig cfg;
  const double alpha = cfg.ema_alpha();
  CHECK(alpha == doctest::Approx(0.3859).epsilon(1e-3));

  const Vector12d prev = Vector12d::Constant(0.4);
  CHECK((ema_filter(prev, prev, alpha) - prev).norm() == doctest::Approx(0.0).epsilon(1e-15));

  Vector12d y = Vector12d::Zero();
  const Vector12d ones = Vector12d::Constant(1.0);
  y = ema_filter(y, ones, alpha);
  CHECK(y[0] == doctest::Approx(0.3859).epsilon(1e-3));
  double prev_value = y[0];
  for (int i = 0; i < 100; ++i) {
    y = ema_filter(y, ones, alpha);
    CHECK(y[0] >= prev_value);  // monotone convergence
    prev_value = y[0];
  }
  CHECK(y[0] == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("default reset stands at the standing height; rsi injects state") {
  EnvConfig cfg;
  JumpEnv e = make_env(cfg);
  e.reset(Command{}, phys::Terrain{}, nominal_draw());
  CHECK(e.sim_state().base_pos.z() == doctest::Approx(the_model().standing_height()).epsilon(1e-12));
  CHECK(e.sim_state().v.norm() == 0.0);
  CHECK(e.phase() == Phase::Stance);

  RsiSample rsi{0.6, 2.0};
  e.reset(Command{}, phys::Terrain{}, nominal_draw(), rsi);
  CHECK(e.sim_state().base_pos.z() == 0.6);
  CHECK(e.sim_state().v_world().z() == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(e.observation().toggle == 1.0);  // the jump is in progress
}

TEST_CASE("rsi sampling honours the fraction and ranges") {
  EnvConfig cfg;
  cfg.rsi_fraction = 0.25;
  math::RngStream rng(139, 0);
  int hits = 0;
  for (int i = 0; i < 10000; ++i) {
    const auto rsi = maybe_sample_rsi(cfg, rng);
    if (rsi) {
      ++hits;
      CHECK(rsi->height >= cfg.rsi_height_lo);
      CHECK(rsi->height <= cfg.rsi_height_hi);
      CHECK(rsi->upward_velocity >= cfg.rsi_vz_lo);
      CHECK(rsi->upward_velocity <= cfg.rsi_vz_hi);
    }
  }
  CHECK(hits > 2200);
  CHECK(hits < 2800);

  cfg.rsi_fraction = 0.0;  // disabled beyond Stage I
  for (int i = 0; i < 100; ++i) CHECK_FALSE(maybe_sample_rsi(cfg, rng).has_value());
}

TEST_CASE("initial pose colliding with an obstacle is rejected") {
  EnvConfig cfg;
  JumpEnv e = make_env(cfg);
  phys::Obstacle obs;
  obs.center = {0.0, 0.0, 0.1};  // right under the robot
  obs.length = 0.4;
  obs.width = 0.4;
  obs.height = 0.2;
  CHECK_THROWS_AS(e.reset(Command{}, phys::make_obstacle_terrain(obs), nominal_draw()),
                  std::runtime_error);
}

TEST_CASE("action pipeline: zero action tracks q_nom, filtered scale, hard clip") {
  EnvConfig cfg;
  cfg.toggle_immediately = true;
  JumpEnv e = make_env(cfg);
  e.reset(Command{}, phys::Terrain{}, nominal_draw());

  e.step(Vector12d::Zero());
  CHECK((e.last_command() - the_model().q_nom).norm() == doctest::Approx(0.0).epsilon(1e-15));

  // fresh filter, unit action on one joint: q_nom + scale * alpha
  JumpEnv e2 = make_env(cfg);
  e2.reset(Command{}, phys::Terrain{}, nominal_draw());
  Vector12d a = Vector12d::Zero();
  a[0] = 1.0;
  e2.step(a);
  CHECK(e2.last_command()[0] ==
        doctest::Approx(the_model().q_nom[0] + 0.5 * cfg.ema_alpha()).epsilon(1e-9));

  // saturating action pins the command at the hard limit
  JumpEnv e3 = make_env(cfg);
  e3.reset(Command{}, phys::Terrain{}, nominal_draw());
  Vector12d big = Vector12d::Zero();
  big[0] = 1e4;
  for (int i = 0; i < 20 && !e3.done(); ++i) e3.step(big);
  CHECK(e3.last_command()[0] <= the_model().upper_limits()[0] + 1e-12);
  const auto lower = the_model().lower_limits();
  const auto upper = the_model().upper_limits();
  for (int j = 0; j < 12; ++j) {
    CHECK(e3.last_command()[j] >= lower[j] - 1e-12);
    CHECK(e3.last_command()[j] <= upper[j] + 1e-12);
  }
}

TEST_CASE("non-finite action aborts the episode") {
  EnvConfig cfg;
  JumpEnv e = make_env(cfg);
  e.reset(Command{}, phys::Terrain{}, nominal_draw());
  Vector12d bad = Vector12d::Zero();
  bad[3] = std::numeric_limits<double>::quiet_NaN();
  const StepResult res = e.step(bad);
  CHECK(res.done);
  CHECK(e.outcome().cause == EpisodeOutcome::Cause::Diverged);
  CHECK_THROWS_AS(e.step(Vector12d::Zero()), std::logic_error);
}

TEST_CASE("detect_phase counter semantics") {
  std::array<int, 4> grounded{1, 1, 1, 1};
  std::array<int, 4> airborne{0, 0, 0, 0};
  std::array<int, 4> one_foot{1, 0, 0, 0};
  int counter = 0;

  // all contacts, stance stays stance
  CHECK(detect_phase(Phase::Stance, grounded, true, counter, 5) == Phase::Stance);
  // toggle off: counter never accumulates
  for (int i = 0; i < 10; ++i)
    CHECK(detect_phase(Phase::Stance, airborne, false, counter, 5) == Phase::Stance);
  CHECK(counter == 0);
  // the fifth consecutive contact-free step triggers flight
  Phase p = Phase::Stance;
  for (int i = 0; i < 4; ++i) {
    p = detect_phase(p, airborne, true, counter, 5);
    CHECK(p == Phase::Stance);
  }
  p = detect_phase(p, airborne, true, counter, 5);
  CHECK(p == Phase::Flight);
  // a grounded step resets the count
  counter = 0;
  p = Phase::Stance;
  for (int i = 0; i < 4; ++i) p = detect_phase(p, airborne, true, counter, 5);
  p = detect_phase(p, grounded, true, counter, 5);
  CHECK(p == Phase::Stance);
  CHECK(counter == 0);
  // any contact in flight lands; landing absorbs
  CHECK(detect_phase(Phase::Flight, one_foot, true, counter, 5) == Phase::Landing);
  CHECK(detect_phase(Phase::Flight, airborne, true, counter, 5) == Phase::Flight);
  CHECK(detect_phase(Phase::Landing, airborne, true, counter, 5) == Phase::Landing);
}

TEST_CASE("termination thresholds sit exactly on the published side") {
  EnvConfig cfg;
  const auto model = the_model();
  phys::Terrain flat;
  phys::SimState s;
  s.base_pos = {0, 0, model.standing_height()};
  s.q = model.q_nom;
  const Eigen::Vector3d p_des(0, 0, 0.3);
  const math::UnitQuaternion q_des;

  SUBCASE("base height 0.12 m") {
    // legs folded upward so only the height threshold is in play
    for (int leg = 0; leg < 4; ++leg) {
      s.q[3 * leg + 1] = 2.8;
      s.q[3 * leg + 2] = -0.84;
    }
    s.base_pos.z() = 0.119;
    auto cause = check_termination(s, model, flat, Phase::Stance, p_des, q_des, 1.0, cfg);
    REQUIRE(cause.has_value());
    CHECK(*cause == EpisodeOutcome::Cause::LowHeight);
    s.base_pos.z() = 0.121;
    // the body box still clears the ground at 0.121 (half height 0.05)
    CHECK_FALSE(check_termination(s, model, flat, Phase::Stance, p_des, q_des, 1.0, cfg).has_value());
  }
  SUBCASE("orientation error 3.0 rad") {
    s.base_pos = {0, 0, 1.0};  // keep collision and height out of the way
    s.base_quat = math::UnitQuaternion::from_rotvec({0, 0, 3.05});
    auto cause = check_termination(s, model, flat, Phase::Stance, p_des, q_des, 1.0, cfg);
    REQUIRE(cause.has_value());
    CHECK(*cause == EpisodeOutcome::Cause::Orientation);
    s.base_quat = math::UnitQuaternion::from_rotvec({0, 0, 2.95});
    CHECK_FALSE(check_termination(s, model, flat, Phase::Stance, p_des, q_des, 1.0, cfg).has_value());
  }
  SUBCASE("landing error 0.15 m, only in the landing phase") {
    s.base_pos = {p_des.x() + 0.16, 0, 0.3};
    auto cause = check_termination(s, model, flat, Phase::Landing, p_des, q_des, 1.0, cfg);
    REQUIRE(cause.has_value());
    CHECK(*cause == EpisodeOutcome::Cause::LandingError);
    CHECK_FALSE(check_termination(s, model, flat, Phase::Stance, p_des, q_des, 1.0, cfg).has_value());
    s.base_pos = {p_des.x() + 0.14, 0, 0.3};
    CHECK_FALSE(
        check_termination(s, model, flat, Phase::Landing, p_des, q_des, 1.0, cfg).has_value());
  }
  SUBCASE("timeout at the episode length") {
    auto cause = check_termination(s, model, flat, Phase::Stance, p_des, q_des, 4.0, cfg);
    REQUIRE(cause.has_value());
    CHECK(*cause == EpisodeOutcome::Cause::Timeout);
  }
}

TEST_CASE("zero-action episode stands, times out, never flies; h_max monotone") {
  EnvConfig cfg;
  JumpEnv e = make_env(cfg);
  e.reset(Command{}, phys::Terrain{}, nominal_draw());
  double h_prev = 0.0;
  bool saw_flight = false;
  int steps = 0;
  while (!e.done()) {
    const StepResult res = e.step(Vector12d::Zero());
    saw_flight = saw_flight || res.phase == Phase::Flight;
    ++steps;
    CHECK(e.outcome().h_max >= h_prev);
    h_prev = e.outcome().h_max;
  }
  CHECK_FALSE(saw_flight);
  CHECK(steps == cfg.episode_steps());
  CHECK(e.outcome().cause == EpisodeOutcome::Cause::Timeout);
  CHECK_FALSE(e.outcome().terminated);
  CHECK_FALSE(e.outcome().landed);
}

TEST_CASE("phase sequence matches Stance+ (Flight+ Landing+)?") {
  EnvConfig cfg;
  cfg.toggle_immediately = true;
  math::RngStream rng(149, 0);
  for (int episode = 0; episode < 8; ++episode) {
    JumpEnv e = make_env(cfg, 1000 + episode);
    // RSI starts give reliable flight phases to exercise the machine
    const bool rsi = episode % 2 == 0;
    e.reset(Command{}, phys::Terrain{}, nominal_draw(),
            rsi ? std::optional<RsiSample>(RsiSample{0.6, 2.0}) : std::nullopt);
    std::vector<Phase> seq{e.phase()};
    while (!e.done()) {
      Vector12d a;
      for (int j = 0; j < 12; ++j) a[j] = rng.normal() * 0.5;
      seq.push_back(e.step(a).phase);
    }
    // grammar check
    size_t i = 0;
    while (i < seq.size() && seq[i] == Phase::Stance) ++i;
    if (i < seq.size()) {
      REQUIRE(seq[i] == Phase::Flight);
      while (i < seq.size() && seq[i] == Phase::Flight) ++i;
      if (i < seq.size()) {
        REQUIRE(seq[i] == Phase::Landing);
        while (i < seq.size() && seq[i] == Phase::Landing) ++i;
      }
    }
    CHECK(i == seq.size());
  }
}

TEST_CASE("seeded episodes replay identically") {
  EnvConfig cfg;
  auto run = [&](uint64_t seed) {
    JumpEnv e = make_env(cfg, seed, 3);
    math::RngStream rng(seed, 999);
    domainrand::DomainRandConfig dr;
    auto draw = domainrand::sample_draw(rng, dr);
    e.reset(Command{}, phys::Terrain{}, draw);
    std::vector<double> rewards;
    while (!e.done()) {
      Vector12d a;
      for (int j = 0; j < 12; ++j) a[j] = rng.normal() * 0.3;
      rewards.push_back(e.step(a).reward);
    }
    return rewards;
  };
  const auto r1 = run(42);
  const auto r2 = run(42);
  REQUIRE(r1.size() == r2.size());
  for (size_t i = 0; i < r1.size(); ++i) CHECK(r1[i] == r2[i]);
}

TEST_CASE("encoder offsets shift observations but not dynamics") {
  EnvConfig cfg;
  domainrand::RandomizationDraw with_offsets;
  with_offsets.joint_offsets = Vector12d::Constant(0.02);

  JumpEnv plain = make_env(cfg, 5, 0);
  JumpEnv offset = make_env(cfg, 5, 0);
  plain.reset(Command{}, phys::Terrain{}, nominal_draw());
  offset.reset(Command{}, phys::Terrain{}, with_offsets);

  math::RngStream rng(151, 0);
  for (int i = 0; i < 50; ++i) {
    Vector12d a;
    for (int j = 0; j < 12; ++j) a[j] = rng.normal() * 0.3;
    plain.step(a);
    offset.step(a);
  }
  CHECK((plain.sim_state().q - offset.sim_state().q).norm() == 0.0);
  CHECK((plain.sim_state().base_pos - offset.sim_state().base_pos).norm() == 0.0);
  const auto& rec_plain = plain.observation().records.back();
  const auto& rec_offset = offset.observation().records.back();
  CHECK((rec_offset.q - rec_plain.q - Vector12d::Constant(0.02)).norm() ==
        doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("hopper: force balance, gravity drop, bounded return") {
  HopperEnv h;
  h.reset();
  // thrust equal to weight holds the mass at the target: reward 1 each step
  for (int i = 0; i < 50; ++i) {
    const auto res = h.step(9.81);
    CHECK(res.reward == doctest::Approx(1.0).epsilon(1e-12));
  }
  h.reset();
  double total = 0.0;
  bool done = false;
  int steps = 0;
  double reward_prev = 1.0;
  while (!done) {
    const auto res = h.step(0.0);  // free fall, reward decays
    CHECK(res.reward <= reward_prev + 1e-12);
    reward_prev = res.reward;
    total += res.reward;
    done = res.done;
    ++steps;
  }
  CHECK(steps == HopperEnv::kEpisodeSteps);
  CHECK(total < 200.0);
  CHECK(h.height() == 0.0);  // resting on the floor
}
