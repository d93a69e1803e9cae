#pragma once

#include <memory>
#include <vector>

#include "quadjump/env/hopper_env.hpp"
#include "quadjump/env/jump_env.hpp"
#include "quadjump/orchestrator/config.hpp"
#include "quadjump/ppo/network.hpp"

namespace qj::orch {

struct EpisodeEvent {
  int env_id = 0;
  double episode_return = 0.0;  // unscaled
  int length = 0;
  bool success = false;
  bool reached_flight = false;
  env::EpisodeOutcome outcome;
  int level = 0;  // at episode start
};

struct IterationStats {
  double reward_sum = 0.0;  // unscaled, per step
  long long step_count = 0;
  std::array<double, rewards::kNumTerms> term_sums{};
  std::vector<EpisodeEvent> episodes;
  std::array<long, 7> cause_counts{};  // indexed by EpisodeOutcome::Cause
  double h_max_sum = 0.0;
  int aborted_episodes = 0;  // non-finite action or divergence

  void merge(const IterationStats& other);
};

// Batch of environments behind one stepping interface. Observations and
// actions are float32 matrices with one column per environment.
class VecEnv {
 public:
  virtual ~VecEnv() = default;
  virtual int n() const = 0;
  virtual int obs_dim() const = 0;
  virtual int act_dim() const = 0;
  virtual void reset_all() = 0;
  virtual const ppo::MatrixXf& obs() const = 0;
  // Advances every environment one control step; fills scaled rewards and
  // done flags; finished episodes are reset in place with fresh commands
  // and randomization draws, and their outcomes recorded into `stats`.
  virtual void step(const ppo::MatrixXf& actions, ppo::VectorXf& rewards, ppo::VectorXf& dones,
                    IterationStats& stats) = 0;

  virtual std::vector<uint64_t> rng_counters() const { return {}; }
  virtual void set_rng_counters(const std::vector<uint64_t>&) {}
  virtual std::vector<int> curriculum_levels() const { return {}; }
  virtual std::vector<int> curriculum_streaks() const { return {}; }
  virtual void set_curriculum(const std::vector<int>&, const std::vector<int>&) {}
};

class JumpVecEnv : public VecEnv {
 public:
  JumpVecEnv(const RunConfig& cfg, const robot::RobotModel& model);

  int n() const override { return static_cast<int>(envs_.size()); }
  int obs_dim() const override { return envs_.front().obs_dim(); }
  int act_dim() const override { return env::JumpEnv::action_dim(); }
  void reset_all() override;
  const ppo::MatrixXf& obs() const override { return obs_; }
  void step(const ppo::MatrixXf& actions, ppo::VectorXf& rewards, ppo::VectorXf& dones,
            IterationStats& stats) override;

  std::vector<uint64_t> rng_counters() const override;
  void set_rng_counters(const std::vector<uint64_t>& counters) override;
  std::vector<int> curriculum_levels() const override { return curriculum_.level; }
  std::vector<int> curriculum_streaks() const override { return curriculum_.streak; }
  void set_curriculum(const std::vector<int>& levels, const std::vector<int>& streaks) override;

 private:
  void reset_env(int i);
  void step_range(int begin, int end, const ppo::MatrixXf& actions, ppo::VectorXf& rewards,
                  ppo::VectorXf& dones, IterationStats& stats);

  RunConfig cfg_;
  std::vector<env::JumpEnv> envs_;
  curriculum::CurriculumState curriculum_;
  ppo::MatrixXf obs_;

  struct EpisodeAccumulator {
    double episode_return = 0.0;
    int length = 0;
    bool reached_flight = false;
    int level = 0;
  };
  std::vector<EpisodeAccumulator> acc_;
};

class HopperVecEnv : public VecEnv {
 public:
  HopperVecEnv(const RunConfig& cfg);

  int n() const override { return static_cast<int>(envs_.size()); }
  int obs_dim() const override { return env::HopperEnv::kObsDim; }
  int act_dim() const override { return env::HopperEnv::kActDim; }
  void reset_all() override;
  const ppo::MatrixXf& obs() const override { return obs_; }
  void step(const ppo::MatrixXf& actions, ppo::VectorXf& rewards, ppo::VectorXf& dones,
            IterationStats& stats) override;

 private:
  double reward_scale_;
  std::vector<env::HopperEnv> envs_;
  std::vector<double> returns_;
  std::vector<int> lengths_;
  ppo::MatrixXf obs_;
};

std::unique_ptr<VecEnv> make_vecenv(const RunConfig& cfg, const robot::RobotModel* model);

}  // namespace qj::orch
