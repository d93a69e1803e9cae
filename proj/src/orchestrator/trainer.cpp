#include "quadjump/orchestrator/trainer.hpp"

#include <json.hpp>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <iostream>

namespace qj::orch {

using nlohmann::json;

Trainer::Trainer(const RunConfig& cfg)
    : cfg_(cfg), policy_rng_(cfg.seed, 1), shuffle_rng_(cfg.seed, 2) {
  if (cfg_.env_type == "jump") {
    std::ifstream in(cfg_.model_file);
    if (!in) throw std::runtime_error("trainer: cannot open model file " + cfg_.model_file);
    std::stringstream ss;
    ss << in.rdbuf();
    model_json_ = ss.str();
    model_ = robot::load_model_from_json(model_json_);
  }
  env_ = make_vecenv(cfg_, model_ ? &*model_ : nullptr);

  hyper_ = cfg_.ppo;
  math::RngStream init_rng(cfg_.seed, 3);
  params_ = ppo::PolicyParams::init(env_->obs_dim(), env_->act_dim(), cfg_.hidden,
                                    hyper_.init_log_std, init_rng);
  adam_ = ppo::Adam(params_.param_count());

  std::filesystem::create_directories(cfg_.out_dir);
  metrics_path_ = (std::filesystem::path(cfg_.out_dir) / "metrics.jsonl").string();
  timing_path_ = (std::filesystem::path(cfg_.out_dir) / "timing.log").string();
}

void Trainer::restore(const Checkpoint& ck) {
  if (ck.env_type != cfg_.env_type)
    throw std::runtime_error("trainer: checkpoint env_type mismatch");
  const curriculum::PolicyShape expected{env_->obs_dim(), env_->act_dim(), cfg_.hidden};
  curriculum::stage_transfer(ck.shape(), expected, cfg_.stage, cfg_.curriculum,
                             cfg_.env.rsi_fraction);
  if (ck.config_hash != config_hash(cfg_))
    throw std::runtime_error(
        "trainer: checkpoint was trained with a different configuration (hash mismatch)");

  params_.flat() = ck.params;
  if (ck.stage == cfg_.stage) {
    // exact continuation
    adam_.m() = ck.adam_m;
    adam_.v() = ck.adam_v;
    adam_.set_t(ck.adam_t);
    iteration_ = ck.iteration;
    policy_rng_.set_counter(ck.policy_rng_counter);
    shuffle_rng_.set_counter(ck.shuffle_rng_counter);
    env_->set_rng_counters(ck.env_rng_counters);
    if (!ck.curriculum_levels.empty())
      env_->set_curriculum(ck.curriculum_levels, ck.curriculum_streaks);
  }
  // a different stage keeps only the policy parameters (fresh optimizer,
  // fresh curriculum at the new task)
}

void Trainer::collect_rollouts(ppo::RolloutBuffer& buffer, IterationStats& stats) {
  const int n = env_->n();
  ppo::MatrixXf mean;
  ppo::VectorXf value;
  ppo::MatrixXf actions(env_->act_dim(), n);
  ppo::VectorXf rewards(n), dones(n);

  for (int step = 0; step < cfg_.horizon; ++step) {
    const ppo::MatrixXf& obs = env_->obs();
    buffer.obs.middleCols(step * n, n) = obs;
    ppo::forward(params_, obs, mean, value);
    const auto log_std = params_.log_std();
    for (int i = 0; i < n; ++i) {
      const ppo::VectorXf a = ppo::sample_action(mean.col(i), log_std, policy_rng_);
      actions.col(i) = a;
      buffer.log_probs[buffer.index(step, i)] = static_cast<float>(
          ppo::log_prob(mean.col(i), log_std, a));
      buffer.values[buffer.index(step, i)] = value[i];
    }
    buffer.actions.middleCols(step * n, n) = actions;
    env_->step(actions, rewards, dones, stats);
    buffer.rewards.segment(step * n, n) = rewards;
    buffer.dones.segment(step * n, n) = dones;
  }
  ppo::forward(params_, env_->obs(), mean, value);
  buffer.bootstrap_value = value;
}

void Trainer::write_metrics_line(const IterationStats& stats,
                                 const ppo::UpdateStats& update_stats) {
  json line;
  line["iter"] = iteration_;
  line["stage"] = curriculum::to_string(cfg_.stage);
  line["mean_step_reward"] = stats.step_count ? stats.reward_sum / stats.step_count : 0.0;
  line["episodes"] = stats.episodes.size();
  double ep_return = 0.0, ep_len = 0.0, success = 0.0, flight = 0.0;
  for (const auto& e : stats.episodes) {
    ep_return += e.episode_return;
    ep_len += e.length;
    success += e.success;
    flight += e.reached_flight;
  }
  if (!stats.episodes.empty()) {
    const double n = static_cast<double>(stats.episodes.size());
    line["mean_episode_return"] = ep_return / n;
    line["mean_episode_length"] = ep_len / n;
    line["success_rate"] = success / n;
    line["flight_rate"] = flight / n;
  }
  if (stats.aborted_episodes) line["aborted_episodes"] = stats.aborted_episodes;
  if (!stats.episodes.empty()) {
    line["mean_h_max"] = stats.h_max_sum / static_cast<double>(stats.episodes.size());
    nlohmann::json causes;
    static const char* kCauseNames[] = {"none",          "collision", "low_height", "orientation",
                                        "landing_error", "timeout",   "diverged"};
    for (int c = 0; c < 7; ++c)
      if (stats.cause_counts[c]) causes[kCauseNames[c]] = stats.cause_counts[c];
    line["causes"] = causes;
  }
  json terms;
  for (int t = 0; t < rewards::kNumTerms; ++t)
    terms[rewards::term_name(static_cast<rewards::Term>(t))] =
        stats.step_count ? stats.term_sums[t] / stats.step_count : 0.0;
  line["terms"] = terms;
  const auto levels = env_->curriculum_levels();
  if (!levels.empty()) {
    std::vector<int> hist(cfg_.curriculum.levels, 0);
    for (int l : levels) hist[std::min<size_t>(l, hist.size() - 1)]++;
    line["level_hist"] = hist;
  }
  line["ppo"] = {{"policy_loss", update_stats.policy_loss},
                 {"value_loss", update_stats.value_loss},
                 {"entropy", update_stats.entropy},
                 {"clip_fraction", update_stats.clip_fraction},
                 {"approx_kl", update_stats.approx_kl},
                 {"lr", update_stats.learning_rate}};
  std::ofstream out(metrics_path_, std::ios::app);
  out << line.dump() << "\n";
}

std::string Trainer::checkpoint_path(const std::string& tag) const {
  return (std::filesystem::path(cfg_.out_dir) / ("ckpt_" + tag + ".qjck")).string();
}

Checkpoint Trainer::make_checkpoint() const {
  Checkpoint ck;
  ck.stage = cfg_.stage;
  ck.iteration = iteration_;
  ck.config_hash = config_hash(cfg_);
  ck.env_type = cfg_.env_type;
  ck.obs_dim = params_.obs_dim();
  ck.act_dim = params_.act_dim();
  ck.hidden = params_.hidden();
  ck.params = params_.flat();
  ck.adam_m = adam_.m();
  ck.adam_v = adam_.v();
  ck.adam_t = adam_.t();
  ck.policy_rng_counter = policy_rng_.counter();
  ck.shuffle_rng_counter = shuffle_rng_.counter();
  ck.env_rng_counters = env_->rng_counters();
  ck.curriculum_levels = env_->curriculum_levels();
  ck.curriculum_streaks = env_->curriculum_streaks();
  ck.config_json = canonical_semantic_config(cfg_);
  ck.model_json = model_json_;
  return ck;
}

std::string Trainer::train() {
  const int budget = cfg_.effective_iterations();
  env_->reset_all();
  ppo::RolloutBuffer buffer(env_->n(), cfg_.horizon, env_->obs_dim(), env_->act_dim());
  std::string last_good = checkpoint_path("init");
  save_checkpoint(last_good, make_checkpoint());

  std::ofstream timing(timing_path_, std::ios::app);
  const auto run_start = std::chrono::steady_clock::now();

  while (iteration_ < budget) {
    const auto iter_start = std::chrono::steady_clock::now();
    IterationStats stats;
    collect_rollouts(buffer, stats);

    ppo::UpdateStats update_stats;
    try {
      update_stats = ppo::update(params_, adam_, buffer, hyper_, shuffle_rng_, cfg_.workers);
    } catch (const std::exception& e) {
      save_checkpoint(checkpoint_path("abort"), make_checkpoint());
      throw std::runtime_error(std::string(e.what()) +
                               "; last good checkpoint: " + checkpoint_path("abort"));
    }

    ++iteration_;
    write_metrics_line(stats, update_stats);
    if (cfg_.checkpoint_every > 0 && iteration_ % cfg_.checkpoint_every == 0) {
      last_good = checkpoint_path(std::to_string(iteration_));
      save_checkpoint(last_good, make_checkpoint());
    }
    const double iter_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - iter_start).count();
    timing << "iter " << iteration_ << " wall_s " << iter_s << "\n";
  }

  const double total_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - run_start).count();
  timing << "total wall_s " << total_s << " iterations " << iteration_ << "\n";

  const std::string final_path = checkpoint_path("final");
  save_checkpoint(final_path, make_checkpoint());
  return final_path;
}

}  // namespace qj::orch
