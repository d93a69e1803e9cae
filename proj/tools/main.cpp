#include <CLI11.hpp>
#include <json.hpp>

#include <iostream>
#include <sstream>

#include "quadjump/orchestrator/evaluator.hpp"
#include "quadjump/orchestrator/trainer.hpp"

using namespace qj;

namespace {

std::vector<double> parse_csv_doubles(const std::string& text, size_t expected,
                                      const std::string& what) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(std::stod(item));
  if (out.size() != expected)
    throw CLI::ValidationError(what + " expects " + std::to_string(expected) + " comma-separated values");
  return out;
}

ppo::PolicyParams params_from_checkpoint(const orch::Checkpoint& ck) {
  ppo::PolicyParams p(ck.obs_dim, ck.act_dim, ck.hidden);
  if (p.param_count() != ck.params.size())
    throw std::runtime_error("checkpoint parameter count does not match its declared shape");
  p.flat() = ck.params;
  return p;
}

int run_train(const std::string& config_path, const std::string& stage,
              const std::string& resume, int iterations, const std::string& out_dir,
              long seed, int envs) {
  orch::RunConfig cfg = orch::load_config(config_path);
  if (!stage.empty()) cfg.stage = curriculum::stage_from_string(stage);
  if (iterations >= 0) cfg.iterations = iterations;
  if (!out_dir.empty()) cfg.out_dir = out_dir;
  if (seed >= 0) cfg.seed = static_cast<uint64_t>(seed);
  if (envs > 0) cfg.n_envs = envs;

  orch::Trainer trainer(cfg);
  if (!resume.empty()) trainer.restore(orch::load_checkpoint(resume));
  const std::string final_path = trainer.train();
  std::cout << "final checkpoint: " << final_path << "\n";
  std::cout << "metrics: " << cfg.out_dir << "/metrics.jsonl\n";
  return 0;
}

int run_eval(const std::string& ckpt_path, const std::string& grid_text, long trials,
             const std::string& profile, int nx, int ny, const std::string& out_csv,
             long seed) {
  const orch::Checkpoint ck = orch::load_checkpoint(ckpt_path);
  const orch::RunConfig cfg = orch::config_from_checkpoint(ck);
  const robot::RobotModel model = robot::load_model_from_json(ck.model_json);
  const ppo::PolicyParams params = params_from_checkpoint(ck);

  orch::GridSpec grid;
  if (!grid_text.empty()) {
    const auto v = parse_csv_doubles(grid_text, 4, "--grid");
    grid.x0 = v[0];
    grid.x1 = v[1];
    grid.y0 = v[2];
    grid.y1 = v[3];
  }
  grid.nx = nx;
  grid.ny = ny;

  const auto report = orch::evaluate_grid(params, cfg, model, grid, trials,
                                          domainrand::profile_from_string(profile),
                                          static_cast<uint64_t>(seed));
  nlohmann::json summary;
  summary["trials"] = report.trials;
  summary["successes"] = report.successes;
  summary["success_rate"] = report.success_rate;
  summary["mean_error_m"] = report.mean_error;
  std::cout << summary.dump(2) << "\n";
  if (!out_csv.empty()) {
    orch::write_grid_csv(out_csv, report);
    std::cout << "table: " << out_csv << "\n";
  }
  return 0;
}

int run_play(const std::string& ckpt_path, const std::string& command_text,
             const std::string& obstacle_text, const std::string& profile, long seed) {
  const orch::Checkpoint ck = orch::load_checkpoint(ckpt_path);
  const orch::RunConfig cfg = orch::config_from_checkpoint(ck);
  const robot::RobotModel model = robot::load_model_from_json(ck.model_json);
  const ppo::PolicyParams params = params_from_checkpoint(ck);

  const auto v = parse_csv_doubles(command_text, 3, "--command");
  env::Command cmd;
  cmd.dp_des = {v[0], v[1], 0.0};
  cmd.dq_des = math::UnitQuaternion::from_yaw(v[2]);

  phys::Terrain terrain;
  if (!obstacle_text.empty()) {
    std::stringstream ss(obstacle_text);
    std::string cls;
    std::getline(ss, cls, ',');
    const auto nums = parse_csv_doubles(obstacle_text.substr(cls.size() + 1), 5, "--obstacle");
    phys::Obstacle obs;
    obs.cls = phys::obstacle_class_from_string(cls);
    obs.height = nums[0];
    obs.width = nums[1];
    obs.length = nums[2];
    obs.center = {nums[3], nums[4], nums[0] / 2.0};
    if (obs.cls == phys::ObstacleClass::Slope) obs.slope_angle = std::atan2(obs.height, obs.length);
    terrain = phys::make_obstacle_terrain(obs);
    cmd.has_obstacle = true;
    cmd.p_obs = obs.center;
    cmd.dim_obs = {obs.height, obs.width, obs.length};
    if (obs.footprint_contains(cmd.dp_des.x(), cmd.dp_des.y()))
      cmd.dp_des.z() = obs.surface_height(cmd.dp_des.x(), cmd.dp_des.y());
  }

  const auto result = orch::play_episode(params, cfg, model, cmd, terrain,
                                         domainrand::profile_from_string(profile),
                                         static_cast<uint64_t>(seed));
  nlohmann::json out;
  out["landed"] = result.outcome.landed;
  out["terminated"] = result.outcome.terminated;
  out["cause"] = env::to_string(result.outcome.cause);
  out["reached_flight"] = result.reached_flight;
  out["landing_error_m"] = result.outcome.landing_pos_error;
  out["landing_yaw_error_rad"] = result.outcome.landing_yaw_error;
  out["max_height_m"] = result.outcome.h_max;
  out["episode_return"] = result.episode_return;
  out["steps"] = result.steps;
  std::cout << out.dump(2) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"goal-conditioned quadruped jumping: training, evaluation, playback"};
  app.require_subcommand(1);

  // train
  auto* train = app.add_subcommand("train", "run one curriculum stage");
  std::string config_path, stage, resume, out_dir;
  int iterations = -1, envs = 0;
  long seed = -1;
  train->add_option("--config", config_path, "run configuration document")->required();
  train->add_option("--stage", stage, "curriculum stage I|II|III");
  train->add_option("--resume", resume, "checkpoint to continue or transfer from");
  train->add_option("--iterations", iterations, "override the stage budget");
  train->add_option("--out", out_dir, "override run.out_dir");
  train->add_option("--seed", seed, "override run.seed");
  train->add_option("--envs", envs, "override run.n_envs");

  // eval
  auto* eval = app.add_subcommand("eval", "success-rate grid evaluation");
  std::string ckpt, grid_text, profile = "off", out_csv;
  long trials = 800;
  int nx = 40, ny = 20;
  eval->add_option("--ckpt", ckpt, "checkpoint file")->required();
  eval->add_option("--grid", grid_text, "x0,x1,y0,y1 (default 0,1.2,-0.3,0.3)");
  eval->add_option("--trials", trials, "total trials; multiple of nx*ny")->required();
  eval->add_option("--profile", profile, "randomization profile train|deploy_eval|off");
  eval->add_option("--nx", nx, "grid cells along x");
  eval->add_option("--ny", ny, "grid cells along y");
  eval->add_option("--out", out_csv, "write the per-trial table to this CSV");
  long eval_seed = 12345;
  eval->add_option("--seed", eval_seed, "evaluation seed");

  // play
  auto* play = app.add_subcommand("play", "run one episode from a user command");
  std::string play_ckpt, command_text, obstacle_text, play_profile = "off";
  long play_seed = 0;
  play->add_option("--ckpt", play_ckpt, "checkpoint file")->required();
  play->add_option("--command", command_text, "dx,dy,dyaw")->required();
  play->add_option("--obstacle", obstacle_text, "class,h,w,l,px,py");
  play->add_option("--profile", play_profile, "randomization profile");
  play->add_option("--seed", play_seed, "episode seed");

  // export
  auto* exp = app.add_subcommand("export", "write flat parameter arrays + manifest");
  std::string exp_ckpt, exp_out;
  exp->add_option("--ckpt", exp_ckpt, "checkpoint file")->required();
  exp->add_option("--out", exp_out, "output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (train->parsed())
      return run_train(config_path, stage, resume, iterations, out_dir, seed, envs);
    if (eval->parsed())
      return run_eval(ckpt, grid_text, trials, profile, nx, ny, out_csv, eval_seed);
    if (play->parsed())
      return run_play(play_ckpt, command_text, obstacle_text, play_profile, play_seed);
    if (exp->parsed()) {
      orch::export_params(exp_out, orch::load_checkpoint(exp_ckpt));
      std::cout << "exported to " << exp_out << "\n";
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}
