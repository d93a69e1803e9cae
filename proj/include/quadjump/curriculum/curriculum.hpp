#pragma once

#include <string>
#include <vector>

#include "quadjump/env/command.hpp"
#include "quadjump/math/rng.hpp"
#include "quadjump/physics/terrain.hpp"

namespace qj::curriculum {

enum class Stage { I, II, III };

Stage stage_from_string(const std::string& s);
const char* to_string(Stage s);

struct CurriculumConfig {
  int levels = 10;
  int promote_streak = 3;
  double replay_fraction = 0.2;  // Stage III flat-ground episodes
  // Stage II level grids: level L spans x in [0, x_per_level*(L+1)],
  // y in +-y_per_level*(L+1), yaw in +-yaw_per_level*(L+1)
  double x_per_level = 0.12;
  double y_per_level = 0.03;
  double yaw_per_level = 3.0 * M_PI / 180.0;
  // Stage III obstacle heights: [0.02, 0.02 + height_per_level*L], capped
  double obstacle_height_base = 0.02;
  double obstacle_height_per_level = 0.013;
  double obstacle_height_max = 0.15;
};

// Per-environment difficulty levels with promotion/demotion bookkeeping.
// Success after `promote_streak` consecutive clean landings promotes;
// a failure termination demotes immediately; a neutral episode (timed out
// without landing) only resets the streak.
struct CurriculumState {
  Stage stage = Stage::I;
  std::vector<int> level;
  std::vector<int> streak;

  CurriculumState() = default;
  CurriculumState(Stage stage_, int n_envs) : stage(stage_), level(n_envs, 0), streak(n_envs, 0) {}
};

struct EpisodeSpec {
  env::Command command;
  phys::Terrain terrain;
};

// Draws a command (and terrain) for one environment at its current level.
// Stage I: jump in place on flat ground. Stage II: landing pose from the
// level's ranges, flat ground. Stage III: long-range commands, with an
// obstacle unless the flat-ground replay coin fires.
EpisodeSpec sample_command(const CurriculumState& cs, const CurriculumConfig& cfg, int env_id,
                           math::RngStream& rng);

// Updates the environment's level from an episode outcome; returns the new
// level. Levels move by at most one per episode.
int record_outcome(CurriculumState& cs, const CurriculumConfig& cfg, int env_id,
                   const env::EpisodeOutcome& outcome, double landing_gate = 0.15);

// Per-stage trainer settings used when a checkpoint moves to the next task.
struct StagePlan {
  Stage stage = Stage::I;
  double rsi_fraction = 0.0;      // fraction of resets started mid-jump
  double replay_fraction = 0.0;
  int iterations_desk = 0;
  int iterations_paper = 0;
};

StagePlan stage_plan(Stage stage, const CurriculumConfig& cfg, double rsi_fraction_stage1);

// Shape summary of a saved policy, checked on stage transfer.
struct PolicyShape {
  int obs_dim = 0;
  int act_dim = 0;
  std::vector<int> hidden;
  bool operator==(const PolicyShape&) const = default;
};

// Validates that a checkpointed policy can drive the next stage (the
// observation layout is stage-invariant) and returns its settings.
// Throws std::runtime_error on a shape mismatch.
StagePlan stage_transfer(const PolicyShape& checkpoint_shape, const PolicyShape& expected,
                         Stage next_stage, const CurriculumConfig& cfg,
                         double rsi_fraction_stage1);

}  // namespace qj::curriculum
