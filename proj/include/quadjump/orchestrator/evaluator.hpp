#pragma once

#include <functional>
#include <string>
#include <vector>

#include "quadjump/orchestrator/config.hpp"
#include "quadjump/ppo/network.hpp"

namespace qj::orch {

struct GridSpec {
  double x0 = 0.0, x1 = 1.2;
  double y0 = -0.3, y1 = 0.3;
  int nx = 40, ny = 20;
};

struct TrialRow {
  double x_des, y_des;
  double x_land, y_land;
  double error;  // settled planar landing error [m]
  bool terminated;
};

struct GridReport {
  long trials = 0;
  long successes = 0;
  double success_rate = 0.0;
  double mean_error = 0.0;  // over successful landings
  std::vector<TrialRow> rows;
};

// Deterministic-policy evaluation over a uniform command grid. `trials`
// must be an exact multiple of nx * ny. Success is an episode that lands
// and never hits a failure termination (the landing gate applies).
GridReport evaluate_grid(const ppo::PolicyParams& params, const RunConfig& cfg,
                         const robot::RobotModel& model, const GridSpec& grid, long trials,
                         domainrand::Profile profile, uint64_t seed);

// Grid harness with an injectable episode runner (tests use scripted
// agents; the overload above plugs in the real policy).
struct EpisodeResult {
  env::EpisodeOutcome outcome;
  Eigen::Vector2d landing_xy{0, 0};
};
using EpisodeRunner =
    std::function<EpisodeResult(int worker, long trial, const env::Command& command,
                                const domainrand::RandomizationDraw& draw)>;
GridReport evaluate_grid_with(const EpisodeRunner& runner, const GridSpec& grid, long trials,
                              const domainrand::DomainRandConfig& dr, int workers,
                              uint64_t seed);

void write_grid_csv(const std::string& path, const GridReport& report);

struct PolicyEvalResult {
  int episodes = 0;
  double flight_rate = 0.0;    // fraction of episodes that reached Flight
  double success_rate = 0.0;
  double mean_return = 0.0;    // unscaled reward sum
  double mean_h_max = 0.0;
};

// Deterministic (mean-action) episodes with curriculum commands at the
// given level, randomization off unless a profile is supplied.
PolicyEvalResult evaluate_episodes(const ppo::PolicyParams& params, const RunConfig& cfg,
                                   const robot::RobotModel& model, int episodes, int level,
                                   domainrand::Profile profile, uint64_t seed);

struct PlayResult {
  env::EpisodeOutcome outcome;
  double episode_return = 0.0;
  int steps = 0;
  bool reached_flight = false;
  double flight_distance = 0.0;  // planar displacement from reset to settle
};

// One scripted episode from a user command.
PlayResult play_episode(const ppo::PolicyParams& params, const RunConfig& cfg,
                        const robot::RobotModel& model, const env::Command& command,
                        const phys::Terrain& terrain, domainrand::Profile profile, uint64_t seed);

}  // namespace qj::orch
