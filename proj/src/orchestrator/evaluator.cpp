#include "quadjump/orchestrator/evaluator.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <memory>
#include <thread>

namespace qj::orch {

namespace {

// one deterministic episode; returns the settled base position through `land`
env::EpisodeOutcome run_episode(env::JumpEnv& e, const ppo::PolicyParams& params,
                                const env::Command& command, const phys::Terrain& terrain,
                                const domainrand::RandomizationDraw& draw,
                                Eigen::Vector2d* land, double* ep_return, bool* flight) {
  e.reset(command, terrain, draw);
  ppo::MatrixXf mean;
  ppo::VectorXf value;
  double ret = 0.0;
  bool saw_flight = false;
  while (!e.done()) {
    ppo::MatrixXf obs = e.flat_observation();
    ppo::forward(params, obs, mean, value);
    const env::StepResult res = e.step(mean.col(0).cast<double>());
    ret += res.reward;
    saw_flight = saw_flight || res.phase == env::Phase::Flight;
  }
  if (land) *land = e.sim_state().base_pos.head<2>();
  if (ep_return) *ep_return = ret;
  if (flight) *flight = saw_flight;
  return e.outcome();
}

env::EnvConfig eval_env_config(const RunConfig& cfg) {
  env::EnvConfig ec = cfg.env;
  ec.toggle_immediately = true;  // jump on command during evaluation
  ec.rsi_fraction = 0.0;
  return ec;
}

}  // namespace

GridReport evaluate_grid_with(const EpisodeRunner& runner, const GridSpec& grid, long trials,
                              const domainrand::DomainRandConfig& dr, int workers,
                              uint64_t seed) {
  const long cells = static_cast<long>(grid.nx) * grid.ny;
  if (trials <= 0 || trials % cells != 0)
    throw std::runtime_error("evaluate_grid: trials must be a positive multiple of nx * ny (" +
                             std::to_string(cells) + ")");
  const long per_cell = trials / cells;

  GridReport report;
  report.trials = trials;
  report.rows.resize(trials);

  workers = std::max(1, workers);
  std::vector<std::thread> threads;
  for (int w = 0; w < workers; ++w) {
    threads.emplace_back([&, w]() {
      for (long t = w; t < trials; t += workers) {
        const long cell = t / per_cell;
        const int ix = static_cast<int>(cell % grid.nx);
        const int iy = static_cast<int>(cell / grid.nx);
        env::Command cmd;
        cmd.dp_des.x() = grid.x0 + (grid.x1 - grid.x0) * (ix + 0.5) / grid.nx;
        cmd.dp_des.y() = grid.y0 + (grid.y1 - grid.y0) * (iy + 0.5) / grid.ny;

        math::RngStream draw_rng(seed, 500000 + static_cast<uint64_t>(t));
        const auto draw = domainrand::sample_draw(draw_rng, dr);

        const EpisodeResult res = runner(w, t, cmd, draw);
        TrialRow row{};
        row.x_des = cmd.dp_des.x();
        row.y_des = cmd.dp_des.y();
        row.x_land = res.landing_xy.x();
        row.y_land = res.landing_xy.y();
        row.error = res.outcome.landed ? res.outcome.landing_pos_error
                                       : (res.landing_xy - cmd.dp_des.head<2>()).norm();
        row.terminated = res.outcome.terminated || !res.outcome.landed;
        report.rows[t] = row;
      }
    });
  }
  for (auto& th : threads) th.join();

  double error_sum = 0.0;
  long error_count = 0;
  for (const TrialRow& row : report.rows) {
    if (!row.terminated) {
      ++report.successes;
      error_sum += row.error;
      ++error_count;
    }
  }
  report.success_rate = static_cast<double>(report.successes) / trials;
  report.mean_error = error_count ? error_sum / error_count : 0.0;
  return report;
}

GridReport evaluate_grid(const ppo::PolicyParams& params, const RunConfig& cfg,
                         const robot::RobotModel& model, const GridSpec& grid, long trials,
                         domainrand::Profile profile, uint64_t seed) {
  domainrand::DomainRandConfig dr = cfg.domain_rand;
  dr.profile = profile;
  const env::EnvConfig ec = eval_env_config(cfg);
  const int workers = std::max(1, cfg.workers);

  std::vector<std::unique_ptr<env::JumpEnv>> worker_envs;
  for (int w = 0; w < workers; ++w)
    worker_envs.push_back(std::make_unique<env::JumpEnv>(model, ec, cfg.actuator, cfg.physics,
                                                         cfg.reward, seed, 90000 + w));
  const EpisodeRunner runner = [&](int w, long, const env::Command& cmd,
                                   const domainrand::RandomizationDraw& draw) {
    EpisodeResult res;
    res.outcome = run_episode(*worker_envs[w], params, cmd, phys::Terrain{}, draw,
                              &res.landing_xy, nullptr, nullptr);
    return res;
  };
  return evaluate_grid_with(runner, grid, trials, dr, workers, seed);
}

void write_grid_csv(const std::string& path, const GridReport& report) {
  std::filesystem::create_directories(std::filesystem::path(path).parent_path());
  std::ofstream out(path);
  out << "x_des,y_des,x_land,y_land,error,terminated\n";
  for (const TrialRow& r : report.rows)
    out << r.x_des << ',' << r.y_des << ',' << r.x_land << ',' << r.y_land << ',' << r.error
        << ',' << (r.terminated ? 1 : 0) << "\n";
}

PolicyEvalResult evaluate_episodes(const ppo::PolicyParams& params, const RunConfig& cfg,
                                   const robot::RobotModel& model, int episodes, int level,
                                   domainrand::Profile profile, uint64_t seed) {
  domainrand::DomainRandConfig dr = cfg.domain_rand;
  dr.profile = profile;
  const env::EnvConfig ec = eval_env_config(cfg);

  curriculum::CurriculumState cs(cfg.stage, 1);
  cs.level[0] = level;

  PolicyEvalResult result;
  result.episodes = episodes;
  env::JumpEnv e(model, ec, cfg.actuator, cfg.physics, cfg.reward, seed, 80000);
  math::RngStream cmd_rng(seed, 70000);
  for (int i = 0; i < episodes; ++i) {
    const auto spec = curriculum::sample_command(cs, cfg.curriculum, 0, cmd_rng);
    const auto draw = domainrand::sample_draw(cmd_rng, dr);
    double ep_return = 0.0;
    bool flight = false;
    const auto outcome =
        run_episode(e, params, spec.command, spec.terrain, draw, nullptr, &ep_return, &flight);
    result.flight_rate += flight;
    result.success_rate += outcome.success(cfg.env.landing_error_gate);
    result.mean_return += ep_return;
    result.mean_h_max += outcome.h_max;
  }
  result.flight_rate /= episodes;
  result.success_rate /= episodes;
  result.mean_return /= episodes;
  result.mean_h_max /= episodes;
  return result;
}

PlayResult play_episode(const ppo::PolicyParams& params, const RunConfig& cfg,
                        const robot::RobotModel& model, const env::Command& command,
                        const phys::Terrain& terrain, domainrand::Profile profile,
                        uint64_t seed) {
  domainrand::DomainRandConfig dr = cfg.domain_rand;
  dr.profile = profile;
  math::RngStream rng(seed, 60000);
  const auto draw = domainrand::sample_draw(rng, dr);

  env::JumpEnv e(model, eval_env_config(cfg), cfg.actuator, cfg.physics, cfg.reward, seed, 60001);
  PlayResult result;
  Eigen::Vector2d land;
  bool flight = false;
  result.outcome = run_episode(e, params, command, terrain, draw, &land, &result.episode_return,
                               &flight);
  result.steps = e.steps_taken();
  result.reached_flight = flight;
  result.flight_distance = land.norm();
  return result;
}

}  // namespace qj::orch
