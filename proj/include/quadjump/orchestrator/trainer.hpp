#pragma once

#include <optional>
#include <string>

#include "quadjump/orchestrator/checkpoint.hpp"
#include "quadjump/orchestrator/vecenv.hpp"

namespace qj::orch {

// Collect/update training loop over a vectorized environment, with
// line-delimited metrics, periodic checkpoints, and exact resume.
class Trainer {
 public:
  explicit Trainer(const RunConfig& cfg);

  // Resume from a checkpoint. A checkpoint from the same stage continues
  // the run exactly (iteration counter, RNG cursors, curriculum state,
  // optimizer moments); a checkpoint from another stage transfers the
  // policy onto this stage with fresh optimizer state.
  void restore(const Checkpoint& ck);

  // Runs the stage budget; returns the final checkpoint path.
  std::string train();

  // One rollout of `horizon` control steps across all environments.
  void collect_rollouts(ppo::RolloutBuffer& buffer, IterationStats& stats);

  Checkpoint make_checkpoint() const;
  const ppo::PolicyParams& params() const { return params_; }
  ppo::PolicyParams& params() { return params_; }
  VecEnv& vecenv() { return *env_; }
  const RunConfig& config() const { return cfg_; }
  int iteration() const { return iteration_; }
  const robot::RobotModel* model() const { return model_ ? &*model_ : nullptr; }

 private:
  void write_metrics_line(const IterationStats& stats, const ppo::UpdateStats& update_stats);
  std::string checkpoint_path(const std::string& tag) const;

  RunConfig cfg_;
  std::optional<robot::RobotModel> model_;
  std::unique_ptr<VecEnv> env_;
  ppo::PolicyParams params_;
  ppo::Adam adam_;
  ppo::PpoHyper hyper_;
  math::RngStream policy_rng_;   // action sampling
  math::RngStream shuffle_rng_;  // minibatch shuffling
  int iteration_ = 0;
  std::string model_json_;
  std::string metrics_path_;
  std::string timing_path_;
};

}  // namespace qj::orch
