#include "quadjump/orchestrator/vecenv.hpp"

#include <thread>

namespace qj::orch {

void IterationStats::merge(const IterationStats& other) {
  reward_sum += other.reward_sum;
  step_count += other.step_count;
  for (size_t i = 0; i < term_sums.size(); ++i) term_sums[i] += other.term_sums[i];
  episodes.insert(episodes.end(), other.episodes.begin(), other.episodes.end());
  for (size_t i = 0; i < cause_counts.size(); ++i) cause_counts[i] += other.cause_counts[i];
  h_max_sum += other.h_max_sum;
  aborted_episodes += other.aborted_episodes;
}

JumpVecEnv::JumpVecEnv(const RunConfig& cfg, const robot::RobotModel& model)
    : cfg_(cfg), curriculum_(cfg.stage, cfg.n_envs) {
  env::EnvConfig env_cfg = cfg.env;
  const auto plan = curriculum::stage_plan(cfg.stage, cfg.curriculum, cfg.env.rsi_fraction);
  env_cfg.rsi_fraction = plan.rsi_fraction;  // RSI only applies in Stage I
  envs_.reserve(cfg.n_envs);
  for (int i = 0; i < cfg.n_envs; ++i)
    envs_.emplace_back(model, env_cfg, cfg.actuator, cfg.physics, cfg.reward, cfg.seed, i);
  acc_.resize(cfg.n_envs);
  obs_.setZero(envs_.front().obs_dim(), cfg.n_envs);
}

void JumpVecEnv::reset_env(int i) {
  env::JumpEnv& e = envs_[i];
  const auto spec = curriculum::sample_command(curriculum_, cfg_.curriculum, i, e.rng());
  const auto draw = domainrand::sample_draw(e.rng(), cfg_.domain_rand);
  const auto rsi = env::maybe_sample_rsi(e.config(), e.rng());
  e.reset(spec.command, spec.terrain, draw, rsi);
  acc_[i] = EpisodeAccumulator{};
  acc_[i].level = curriculum_.level[i];
  obs_.col(i) = e.flat_observation();
}

void JumpVecEnv::reset_all() {
  for (int i = 0; i < n(); ++i) reset_env(i);
}

void JumpVecEnv::step_range(int begin, int end, const ppo::MatrixXf& actions,
                            ppo::VectorXf& rewards, ppo::VectorXf& dones, IterationStats& stats) {
  for (int i = begin; i < end; ++i) {
    env::JumpEnv& e = envs_[i];
    Vector12d a = actions.col(i).cast<double>();
    const env::StepResult res = e.step(a);

    stats.reward_sum += res.reward;
    stats.step_count += 1;
    for (int t = 0; t < rewards::kNumTerms; ++t) stats.term_sums[t] += res.breakdown.terms[t];

    acc_[i].episode_return += res.reward;
    acc_[i].length += 1;
    if (res.phase == env::Phase::Flight) acc_[i].reached_flight = true;

    rewards[i] = static_cast<float>(res.reward * cfg_.reward_scale);
    dones[i] = res.done ? 1.f : 0.f;

    if (res.done) {
      const env::EpisodeOutcome& outcome = e.outcome();
      EpisodeEvent ev;
      ev.env_id = i;
      ev.episode_return = acc_[i].episode_return;
      ev.length = acc_[i].length;
      ev.success = outcome.success(cfg_.env.landing_error_gate);
      ev.reached_flight = acc_[i].reached_flight;
      ev.outcome = outcome;
      ev.level = acc_[i].level;
      stats.episodes.push_back(ev);
      stats.cause_counts[static_cast<int>(outcome.cause)] += 1;
      stats.h_max_sum += outcome.h_max;
      if (outcome.cause == env::EpisodeOutcome::Cause::Diverged) stats.aborted_episodes += 1;
      curriculum::record_outcome(curriculum_, cfg_.curriculum, i, outcome,
                                 cfg_.env.landing_error_gate);
      reset_env(i);
    } else {
      obs_.col(i) = e.flat_observation();
    }
  }
}

void JumpVecEnv::step(const ppo::MatrixXf& actions, ppo::VectorXf& rewards, ppo::VectorXf& dones,
                      IterationStats& stats) {
  const int workers = std::max(1, std::min(cfg_.workers, n()));
  if (workers == 1) {
    step_range(0, n(), actions, rewards, dones, stats);
    return;
  }
  std::vector<IterationStats> local(workers);
  std::vector<std::thread> threads;
  const int chunk = (n() + workers - 1) / workers;
  for (int w = 0; w < workers; ++w) {
    const int begin = w * chunk;
    const int end = std::min(begin + chunk, n());
    if (begin >= end) break;
    threads.emplace_back([&, w, begin, end]() {
      step_range(begin, end, actions, rewards, dones, local[w]);
    });
  }
  for (auto& t : threads) t.join();
  for (const auto& s : local) stats.merge(s);  // fixed worker order
}

std::vector<uint64_t> JumpVecEnv::rng_counters() const {
  std::vector<uint64_t> counters;
  counters.reserve(envs_.size());
  for (const auto& e : envs_) counters.push_back(const_cast<env::JumpEnv&>(e).rng().counter());
  return counters;
}

void JumpVecEnv::set_rng_counters(const std::vector<uint64_t>& counters) {
  if (counters.size() != envs_.size())
    throw std::runtime_error("vecenv: rng counter count mismatch");
  for (size_t i = 0; i < envs_.size(); ++i) envs_[i].rng().set_counter(counters[i]);
}

void JumpVecEnv::set_curriculum(const std::vector<int>& levels, const std::vector<int>& streaks) {
  if (levels.size() != envs_.size() || streaks.size() != envs_.size())
    throw std::runtime_error("vecenv: curriculum size mismatch");
  curriculum_.level = levels;
  curriculum_.streak = streaks;
}

HopperVecEnv::HopperVecEnv(const RunConfig& cfg) : reward_scale_(cfg.reward_scale) {
  envs_.resize(cfg.n_envs);
  returns_.assign(cfg.n_envs, 0.0);
  lengths_.assign(cfg.n_envs, 0);
  obs_.setZero(env::HopperEnv::kObsDim, cfg.n_envs);
}

void HopperVecEnv::reset_all() {
  for (size_t i = 0; i < envs_.size(); ++i) {
    obs_.col(i) = envs_[i].reset();
    returns_[i] = 0.0;
    lengths_[i] = 0;
  }
}

void HopperVecEnv::step(const ppo::MatrixXf& actions, ppo::VectorXf& rewards,
                        ppo::VectorXf& dones, IterationStats& stats) {
  for (size_t i = 0; i < envs_.size(); ++i) {
    // map the unbounded policy output onto the thrust range
    const double thrust = 10.0 * (1.0 + static_cast<double>(actions(0, i)));
    const auto res = envs_[i].step(thrust);
    stats.reward_sum += res.reward;
    stats.step_count += 1;
    returns_[i] += res.reward;
    lengths_[i] += 1;
    rewards[i] = static_cast<float>(res.reward * reward_scale_);
    dones[i] = res.done ? 1.f : 0.f;
    if (res.done) {
      EpisodeEvent ev;
      ev.env_id = static_cast<int>(i);
      ev.episode_return = returns_[i];
      ev.length = lengths_[i];
      stats.episodes.push_back(ev);
      obs_.col(i) = envs_[i].reset();
      returns_[i] = 0.0;
      lengths_[i] = 0;
    } else {
      obs_.col(i) = res.obs;
    }
  }
}

std::unique_ptr<VecEnv> make_vecenv(const RunConfig& cfg, const robot::RobotModel* model) {
  if (cfg.env_type == "hopper") return std::make_unique<HopperVecEnv>(cfg);
  if (!model) throw std::runtime_error("vecenv: jump environment needs a robot model");
  return std::make_unique<JumpVecEnv>(cfg, *model);
}

}  // namespace qj::orch
