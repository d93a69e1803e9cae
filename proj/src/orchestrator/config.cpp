#include "quadjump/orchestrator/config.hpp"

#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

namespace qj::orch {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& msg) { throw std::runtime_error("config: " + msg); }

// strict block reader: every present key must be consumed
class Block {
 public:
  Block(const json& j, std::string name) : j_(j), name_(std::move(name)) {
    if (!j.is_object()) fail("'" + name_ + "' must be an object");
  }
  ~Block() = default;

  template <typename T>
  void get(const char* key, T& out) {
    seen_.insert(key);
    if (j_.contains(key)) out = j_.at(key).get<T>();
  }
  void get_range(const char* key, domainrand::Range& out) {
    seen_.insert(key);
    if (!j_.contains(key)) return;
    const auto& arr = j_.at(key);
    if (!arr.is_array() || arr.size() != 2) fail("'" + name_ + "." + key + "' must be [lo, hi]");
    out.lo = arr[0].get<double>();
    out.hi = arr[1].get<double>();
    if (out.lo > out.hi) fail("'" + name_ + "." + key + "' has lo > hi");
  }
  const json* sub(const char* key) {
    seen_.insert(key);
    return j_.contains(key) ? &j_.at(key) : nullptr;
  }
  void finish() const {
    for (const auto& [key, value] : j_.items())
      if (!seen_.count(key)) fail("unknown key '" + name_ + "." + key + "'");
  }

 private:
  const json& j_;
  std::string name_;
  std::set<std::string> seen_;
};

}  // namespace

int RunConfig::effective_iterations() const {
  if (iterations >= 0) return iterations;
  return curriculum::stage_plan(stage, curriculum, env.rsi_fraction).iterations_desk;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail("cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), std::filesystem::path(path).parent_path().string());
}

RunConfig parse_config(const std::string& text, const std::string& base_dir) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    fail(std::string("parse error: ") + e.what());
  }

  RunConfig cfg;
  Block root(doc, "");

  if (const json* j = root.sub("run")) {
    Block b(*j, "run");
    b.get("n_envs", cfg.n_envs);
    b.get("horizon", cfg.horizon);
    b.get("seed", cfg.seed);
    b.get("workers", cfg.workers);
    b.get("out_dir", cfg.out_dir);
    b.get("checkpoint_every", cfg.checkpoint_every);
    std::string stage = to_string(cfg.stage);
    b.get("stage", stage);
    cfg.stage = curriculum::stage_from_string(stage);
    b.get("iterations", cfg.iterations);
    b.get("env_type", cfg.env_type);
    b.finish();
  }
  if (cfg.n_envs < 1) fail("run.n_envs must be >= 1");
  if (cfg.horizon < 1) fail("run.horizon must be >= 1");
  if (cfg.workers < 1) fail("run.workers must be >= 1");
  if (cfg.env_type != "jump" && cfg.env_type != "hopper")
    fail("run.env_type must be 'jump' or 'hopper'");

  std::string model_file = "assets/quadruped_12kg.json";
  root.get("model_file", model_file);
  std::filesystem::path mp(model_file);
  cfg.model_file = mp.is_absolute() ? mp.string() : (std::filesystem::path(base_dir) / mp).string();

  if (const json* j = root.sub("env")) {
    Block b(*j, "env");
    auto& e = cfg.env;
    b.get("control_dt", e.control_dt);
    b.get("sim_substeps", e.sim_substeps);
    b.get("history_steps", e.history_steps);
    b.get("flight_contact_free_steps", e.flight_contact_free_steps);
    b.get("action_scale", e.action_scale);
    b.get("action_clip_window", e.action_clip_window);
    b.get("filter_cutoff_hz", e.filter_cutoff_hz);
    b.get("episode_seconds", e.episode_seconds);
    b.get("settle_seconds", e.settle_seconds);
    b.get("rsi_fraction", e.rsi_fraction);
    b.get("rsi_height_lo", e.rsi_height_lo);
    b.get("rsi_height_hi", e.rsi_height_hi);
    b.get("rsi_vz_lo", e.rsi_vz_lo);
    b.get("rsi_vz_hi", e.rsi_vz_hi);
    b.get("landing_error_gate", e.landing_error_gate);
    b.get("low_height_threshold", e.low_height_threshold);
    b.get("orientation_threshold", e.orientation_threshold);
    b.get("settle_window_seconds", e.settle_window_seconds);
    b.finish();
  }

  if (const json* j = root.sub("physics")) {
    Block b(*j, "physics");
    auto& p = cfg.physics;
    b.get("k_normal", p.k_normal);
    b.get("d_normal", p.d_normal);
    b.get("tangential_stiffness", p.tangential_stiffness);
    b.get("stopping_mass", p.stopping_mass);
    b.get("contact_force_threshold", p.contact_force_threshold);
    b.finish();
  }

  if (const json* j = root.sub("actuator")) {
    Block b(*j, "actuator");
    double kp = cfg.actuator.kp[0], kd = cfg.actuator.kd[0], lim = cfg.actuator.torque_limit[0];
    b.get("kp", kp);
    b.get("kd", kd);
    b.get("torque_limit", lim);
    b.finish();
    cfg.actuator.kp.setConstant(kp);
    cfg.actuator.kd.setConstant(kd);
    cfg.actuator.torque_limit.setConstant(lim);
  }

  if (const json* j = root.sub("reward")) {
    Block b(*j, "reward");
    auto& r = cfg.reward;
    b.get("w_landing_pos", r.w_landing_pos);
    b.get("sigma_landing_pos", r.sigma_landing_pos);
    b.get("w_landing_ori", r.w_landing_ori);
    b.get("sigma_landing_ori", r.sigma_landing_ori);
    b.get("w_max_height", r.w_max_height);
    b.get("sigma_max_height", r.sigma_max_height);
    b.get("w_jump", r.w_jump);
    b.get("w_base_pos_stance", r.w_base_pos_stance);
    b.get("sigma_base_pos_stance", r.sigma_base_pos_stance);
    b.get("w_base_pos_flight", r.w_base_pos_flight);
    b.get("sigma_base_pos_flight", r.sigma_base_pos_flight);
    b.get("w_base_pos_landing", r.w_base_pos_landing);
    b.get("sigma_base_pos_landing", r.sigma_base_pos_landing);
    b.get("w_ori_stance", r.w_ori_stance);
    b.get("sigma_ori_stance", r.sigma_ori_stance);
    b.get("w_ori_landing", r.w_ori_landing);
    b.get("sigma_ori_landing", r.sigma_ori_landing);
    b.get("w_lin_vel", r.w_lin_vel);
    b.get("sigma_lin_vel", r.sigma_lin_vel);
    b.get("w_ang_vel", r.w_ang_vel);
    b.get("sigma_ang_vel", r.sigma_ang_vel);
    b.get("w_nominal_pose", r.w_nominal_pose);
    b.get("sigma_nominal_pose", r.sigma_nominal_pose);
    b.get("w_maintain_contact", r.w_maintain_contact);
    b.get("w_feet_clearance", r.w_feet_clearance);
    b.get("w_symmetry", r.w_symmetry);
    b.get("w_energy", r.w_energy);
    b.get("w_base_acc", r.w_base_acc);
    b.get("w_contact_change", r.w_contact_change);
    b.get("w_contact_forces", r.w_contact_forces);
    b.get("w_action_rate", r.w_action_rate);
    b.get("w_joint_acc", r.w_joint_acc);
    b.get("w_joint_limits", r.w_joint_limits);
    b.get("sigma_total", r.sigma_total);
    b.finish();
  }

  if (const json* j = root.sub("curriculum")) {
    Block b(*j, "curriculum");
    auto& c = cfg.curriculum;
    b.get("levels", c.levels);
    b.get("promote_streak", c.promote_streak);
    b.get("replay_fraction", c.replay_fraction);
    b.get("x_per_level", c.x_per_level);
    b.get("y_per_level", c.y_per_level);
    b.get("yaw_per_level", c.yaw_per_level);
    b.get("obstacle_height_base", c.obstacle_height_base);
    b.get("obstacle_height_per_level", c.obstacle_height_per_level);
    b.get("obstacle_height_max", c.obstacle_height_max);
    b.finish();
  }

  if (const json* j = root.sub("domain_rand")) {
    Block b(*j, "domain_rand");
    auto& d = cfg.domain_rand;
    std::string profile = to_string(d.profile);
    b.get("profile", profile);
    d.profile = domainrand::profile_from_string(profile);
    b.get_range("ground_friction", d.ground_friction);
    b.get_range("ground_restitution", d.ground_restitution);
    b.get_range("payload_kg", d.payload_kg);
    b.get_range("link_mass_factor", d.link_mass_factor);
    b.get_range("com_displacement_m", d.com_displacement_m);
    b.get_range("episodic_latency_ms", d.episodic_latency_ms);
    b.get_range("per_step_latency_ms", d.per_step_latency_ms);
    b.get_range("motor_strength_factor", d.motor_strength_factor);
    b.get_range("joint_offset_rad", d.joint_offset_rad);
    b.get_range("pd_gain_factor", d.pd_gain_factor);
    b.get_range("joint_friction", d.joint_friction);
    b.get_range("joint_damping", d.joint_damping);
    b.finish();
  }

  if (const json* j = root.sub("ppo")) {
    Block b(*j, "ppo");
    auto& p = cfg.ppo;
    b.get("gamma", p.gamma);
    b.get("gae_lambda", p.gae_lambda);
    b.get("clip_epsilon", p.clip_epsilon);
    b.get("learning_rate", p.learning_rate);
    b.get("epochs", p.epochs);
    b.get("minibatches", p.minibatches);
    b.get("entropy_coef", p.entropy_coef);
    b.get("value_coef", p.value_coef);
    b.get("max_grad_norm", p.max_grad_norm);
    b.get("init_log_std", p.init_log_std);
    b.get("adaptive_lr", p.adaptive_lr);
    b.get("desired_kl", p.desired_kl);
    b.get("lr_min", p.lr_min);
    b.get("lr_max", p.lr_max);
    b.get("hidden", cfg.hidden);
    b.get("reward_scale", cfg.reward_scale);
    b.finish();
  }

  root.finish();

  if (cfg.env.history_steps < 1) fail("env.history_steps must be >= 1");
  if (cfg.ppo.gamma <= 0.0 || cfg.ppo.gamma > 1.0) fail("ppo.gamma must be in (0, 1]");
  if (cfg.ppo.gae_lambda < 0.0 || cfg.ppo.gae_lambda > 1.0) fail("ppo.gae_lambda must be in [0, 1]");
  if (cfg.ppo.clip_epsilon <= 0.0) fail("ppo.clip_epsilon must be positive");
  if (cfg.hidden.empty()) fail("ppo.hidden must not be empty");
  return cfg;
}

namespace {

json semantic_json(const RunConfig& cfg) {
  json j;
  j["env_type"] = cfg.env_type;
  const auto& e = cfg.env;
  j["env"] = {{"control_dt", e.control_dt},
              {"sim_substeps", e.sim_substeps},
              {"history_steps", e.history_steps},
              {"flight_contact_free_steps", e.flight_contact_free_steps},
              {"action_scale", e.action_scale},
              {"action_clip_window", e.action_clip_window},
              {"filter_cutoff_hz", e.filter_cutoff_hz},
              {"episode_seconds", e.episode_seconds},
              {"settle_seconds", e.settle_seconds},
              {"rsi_fraction", e.rsi_fraction},
              {"rsi_height_lo", e.rsi_height_lo},
              {"rsi_height_hi", e.rsi_height_hi},
              {"rsi_vz_lo", e.rsi_vz_lo},
              {"rsi_vz_hi", e.rsi_vz_hi},
              {"landing_error_gate", e.landing_error_gate},
              {"low_height_threshold", e.low_height_threshold},
              {"orientation_threshold", e.orientation_threshold},
              {"settle_window_seconds", e.settle_window_seconds}};
  const auto& p = cfg.physics;
  j["physics"] = {{"k_normal", p.k_normal},
                  {"d_normal", p.d_normal},
                  {"tangential_stiffness", p.tangential_stiffness},
                  {"stopping_mass", p.stopping_mass},
                  {"contact_force_threshold", p.contact_force_threshold}};
  j["actuator"] = {{"kp", cfg.actuator.kp[0]},
                   {"kd", cfg.actuator.kd[0]},
                   {"torque_limit", cfg.actuator.torque_limit[0]}};
  const auto& r = cfg.reward;
  j["reward"] = {
      {"w_landing_pos", r.w_landing_pos},       {"sigma_landing_pos", r.sigma_landing_pos},
      {"w_landing_ori", r.w_landing_ori},       {"sigma_landing_ori", r.sigma_landing_ori},
      {"w_max_height", r.w_max_height},         {"sigma_max_height", r.sigma_max_height},
      {"w_jump", r.w_jump},                     {"w_base_pos_stance", r.w_base_pos_stance},
      {"sigma_base_pos_stance", r.sigma_base_pos_stance},
      {"w_base_pos_flight", r.w_base_pos_flight},
      {"sigma_base_pos_flight", r.sigma_base_pos_flight},
      {"w_base_pos_landing", r.w_base_pos_landing},
      {"sigma_base_pos_landing", r.sigma_base_pos_landing},
      {"w_ori_stance", r.w_ori_stance},         {"sigma_ori_stance", r.sigma_ori_stance},
      {"w_ori_landing", r.w_ori_landing},       {"sigma_ori_landing", r.sigma_ori_landing},
      {"w_lin_vel", r.w_lin_vel},               {"sigma_lin_vel", r.sigma_lin_vel},
      {"w_ang_vel", r.w_ang_vel},               {"sigma_ang_vel", r.sigma_ang_vel},
      {"w_nominal_pose", r.w_nominal_pose},     {"sigma_nominal_pose", r.sigma_nominal_pose},
      {"w_maintain_contact", r.w_maintain_contact},
      {"w_feet_clearance", r.w_feet_clearance}, {"w_symmetry", r.w_symmetry},
      {"w_energy", r.w_energy},                 {"w_base_acc", r.w_base_acc},
      {"w_contact_change", r.w_contact_change}, {"w_contact_forces", r.w_contact_forces},
      {"w_action_rate", r.w_action_rate},       {"w_joint_acc", r.w_joint_acc},
      {"w_joint_limits", r.w_joint_limits},     {"sigma_total", r.sigma_total}};
  const auto& c = cfg.curriculum;
  j["curriculum"] = {{"levels", c.levels},
                     {"promote_streak", c.promote_streak},
                     {"replay_fraction", c.replay_fraction},
                     {"x_per_level", c.x_per_level},
                     {"y_per_level", c.y_per_level},
                     {"yaw_per_level", c.yaw_per_level},
                     {"obstacle_height_base", c.obstacle_height_base},
                     {"obstacle_height_per_level", c.obstacle_height_per_level},
                     {"obstacle_height_max", c.obstacle_height_max}};
  const auto& d = cfg.domain_rand;
  auto range = [](const domainrand::Range& x) { return json::array({x.lo, x.hi}); };
  j["domain_rand"] = {{"profile", to_string(d.profile)},
                      {"ground_friction", range(d.ground_friction)},
                      {"ground_restitution", range(d.ground_restitution)},
                      {"payload_kg", range(d.payload_kg)},
                      {"link_mass_factor", range(d.link_mass_factor)},
                      {"com_displacement_m", range(d.com_displacement_m)},
                      {"episodic_latency_ms", range(d.episodic_latency_ms)},
                      {"per_step_latency_ms", range(d.per_step_latency_ms)},
                      {"motor_strength_factor", range(d.motor_strength_factor)},
                      {"joint_offset_rad", range(d.joint_offset_rad)},
                      {"pd_gain_factor", range(d.pd_gain_factor)},
                      {"joint_friction", range(d.joint_friction)},
                      {"joint_damping", range(d.joint_damping)}};
  const auto& q = cfg.ppo;
  j["ppo"] = {{"gamma", q.gamma},
              {"gae_lambda", q.gae_lambda},
              {"clip_epsilon", q.clip_epsilon},
              {"epochs", q.epochs},
              {"minibatches", q.minibatches},
              {"entropy_coef", q.entropy_coef},
              {"value_coef", q.value_coef},
              {"max_grad_norm", q.max_grad_norm},
              {"init_log_std", q.init_log_std},
              {"adaptive_lr", q.adaptive_lr},
              {"desired_kl", q.desired_kl},
              {"hidden", cfg.hidden},
              {"reward_scale", cfg.reward_scale}};
  return j;
}

}  // namespace

std::string canonical_semantic_config(const RunConfig& cfg) { return semantic_json(cfg).dump(); }

uint64_t config_hash(const RunConfig& cfg) {
  const std::string s = canonical_semantic_config(cfg);
  uint64_t h = 0xcbf29ce484222325ull;  // FNV-1a
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

}  // namespace qj::orch
