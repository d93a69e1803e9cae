#include "quadjump/curriculum/curriculum.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace qj::curriculum {

using env::Command;
using phys::Obstacle;
using phys::ObstacleClass;
using phys::Terrain;

Stage stage_from_string(const std::string& s) {
  if (s == "I" || s == "1") return Stage::I;
  if (s == "II" || s == "2") return Stage::II;
  if (s == "III" || s == "3") return Stage::III;
  throw std::runtime_error("curriculum: unknown stage '" + s + "'");
}

const char* to_string(Stage s) {
  switch (s) {
    case Stage::I: return "I";
    case Stage::II: return "II";
    case Stage::III: return "III";
  }
  return "?";
}

namespace {

constexpr double kObstacleWidth = 0.8;
constexpr double kBarrierLength = 0.05;
constexpr double kBoxLength = 0.30;
constexpr double kSlopeLength = 0.40;
// keep obstacle faces clear of the stance feet and of the landing feet
constexpr double kStanceClearance = 0.23;
constexpr double kLandingClearance = 0.25;

Command stage2_command(int level, const CurriculumConfig& cfg, math::RngStream& rng) {
  Command cmd;
  const double span = level + 1;
  cmd.dp_des.x() = rng.uniform(0.0, cfg.x_per_level * span);
  cmd.dp_des.y() = rng.uniform(-cfg.y_per_level * span, cfg.y_per_level * span);
  cmd.dq_des = math::UnitQuaternion::from_yaw(
      rng.uniform(-cfg.yaw_per_level * span, cfg.yaw_per_level * span));
  return cmd;
}

EpisodeSpec stage3_with_obstacle(int level, const CurriculumConfig& cfg, math::RngStream& rng) {
  const double h_hi = std::min(cfg.obstacle_height_base + cfg.obstacle_height_per_level * level,
                               cfg.obstacle_height_max);
  for (int attempt = 0; attempt < 20; ++attempt) {
    const double h = rng.uniform(cfg.obstacle_height_base, h_hi);
    const int cls = static_cast<int>(rng.uniform_int(3));
    Command cmd;
    cmd.has_obstacle = true;
    cmd.dp_des.y() = rng.uniform(-0.1, 0.1);
    cmd.dq_des = math::UnitQuaternion::from_yaw(rng.uniform(-0.17, 0.17));

    Obstacle obs;
    obs.width = kObstacleWidth;
    obs.height = h;
    obs.center.y() = cmd.dp_des.y() / 2.0;
    obs.center.z() = h / 2.0;

    if (cls == 0) {  // barrier, always crossed
      obs.cls = ObstacleClass::Barrier;
      obs.length = kBarrierLength;
      cmd.dp_des.x() = rng.uniform(0.7, 1.2);
      obs.center.x() = cmd.dp_des.x() * rng.uniform(0.50, 0.55);
    } else if (cls == 1) {  // box: land on top or clear it
      obs.cls = ObstacleClass::Box;
      obs.length = kBoxLength;
      if (rng.uniform() < 0.5) {
        cmd.dp_des.x() = rng.uniform(0.45, 1.2);
        obs.center.x() = cmd.dp_des.x();
        obs.center.y() = cmd.dp_des.y();
        cmd.dp_des.z() = h;
      } else {
        cmd.dp_des.x() = rng.uniform(0.85, 1.2);
        obs.center.x() = cmd.dp_des.x() * rng.uniform(0.50, 0.55);
      }
    } else {  // slope, landed on its upper part
      obs.cls = ObstacleClass::Slope;
      obs.length = kSlopeLength;
      obs.slope_angle = std::atan2(h, kSlopeLength);
      cmd.dp_des.x() = rng.uniform(0.55, 1.2);
      obs.center.x() = cmd.dp_des.x() - 0.1;
      obs.center.y() = cmd.dp_des.y();
      cmd.dp_des.z() = obs.surface_height(cmd.dp_des.x(), cmd.dp_des.y());
    }

    // validity: feet clear of the near face; landing clear of the far face
    // unless the target is on top
    const bool target_on_top = obs.footprint_contains(cmd.dp_des.x(), cmd.dp_des.y());
    if (obs.x_min() < kStanceClearance) continue;
    if (target_on_top) {
      if (obs.cls == ObstacleClass::Barrier) continue;  // nothing to stand on
    } else if (cmd.dp_des.x() - obs.x_max() < kLandingClearance) {
      continue;
    }

    cmd.p_obs = obs.center;
    cmd.dim_obs = {obs.height, obs.width, obs.length};
    EpisodeSpec spec;
    spec.command = cmd;
    spec.terrain = phys::make_obstacle_terrain(obs);
    return spec;
  }
  throw std::runtime_error("curriculum: obstacle placement failed after bounded retries");
}

}  // namespace

EpisodeSpec sample_command(const CurriculumState& cs, const CurriculumConfig& cfg, int env_id,
                           math::RngStream& rng) {
  const int level = cs.level.at(env_id);
  EpisodeSpec spec;
  switch (cs.stage) {
    case Stage::I:
      break;  // jump in place on flat ground
    case Stage::II:
      spec.command = stage2_command(level, cfg, rng);
      break;
    case Stage::III:
      if (rng.uniform() < cfg.replay_fraction)
        spec.command = stage2_command(cfg.levels - 1, cfg, rng);
      else
        spec = stage3_with_obstacle(level, cfg, rng);
      break;
  }
  return spec;
}

int record_outcome(CurriculumState& cs, const CurriculumConfig& cfg, int env_id,
                   const env::EpisodeOutcome& outcome, double landing_gate) {
  int& level = cs.level.at(env_id);
  int& streak = cs.streak.at(env_id);
  if (outcome.success(landing_gate)) {
    if (++streak >= cfg.promote_streak) {
      level = std::min(level + 1, cfg.levels - 1);
      streak = 0;
    }
  } else {
    streak = 0;
    if (outcome.terminated) level = std::max(level - 1, 0);
  }
  return level;
}

StagePlan stage_plan(Stage stage, const CurriculumConfig& cfg, double rsi_fraction_stage1) {
  StagePlan plan;
  plan.stage = stage;
  switch (stage) {
    case Stage::I:
      plan.rsi_fraction = rsi_fraction_stage1;
      plan.iterations_desk = 300;
      plan.iterations_paper = 3000;
      break;
    case Stage::II:
      plan.iterations_desk = 1000;
      plan.iterations_paper = 10000;
      break;
    case Stage::III:
      plan.replay_fraction = cfg.replay_fraction;
      plan.iterations_desk = 1000;
      plan.iterations_paper = 10000;
      break;
  }
  return plan;
}

StagePlan stage_transfer(const PolicyShape& checkpoint_shape, const PolicyShape& expected,
                         Stage next_stage, const CurriculumConfig& cfg,
                         double rsi_fraction_stage1) {
  if (!(checkpoint_shape == expected))
    throw std::runtime_error(
        "curriculum: incompatible checkpoint (policy shape does not match this configuration)");
  return stage_plan(next_stage, cfg, rsi_fraction_stage1);
}

}  // namespace qj::curriculum
