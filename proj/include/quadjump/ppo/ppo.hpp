#pragma once

#include "quadjump/ppo/network.hpp"

namespace qj::ppo {

// Per-env, per-step experience; rectangular n_envs x horizon, step-major
// (index = step * n_envs + env).
struct RolloutBuffer {
  int n_envs = 0, horizon = 0;
  MatrixXf obs;       // obs_dim x (n_envs * horizon)
  MatrixXf actions;   // act_dim x N
  VectorXf log_probs;
  VectorXf rewards;
  VectorXf values;
  VectorXf dones;            // 1 if the episode ended at this step
  VectorXf bootstrap_value;  // n_envs, value of the post-rollout state

  RolloutBuffer() = default;
  RolloutBuffer(int n_envs_, int horizon_, int obs_dim, int act_dim);
  int size() const { return n_envs * horizon; }
  int index(int step, int env) const { return step * n_envs + env; }
};

struct PpoHyper {
  double gamma = 0.99;
  double gae_lambda = 0.95;
  double clip_epsilon = 0.2;
  double learning_rate = 1e-3;
  int epochs = 5;
  int minibatches = 4;
  double entropy_coef = 0.005;
  double value_coef = 1.0;
  double max_grad_norm = 1.0;
  double init_log_std = std::log(0.8);
  // adaptive step keyed on the KL estimate
  bool adaptive_lr = true;
  double desired_kl = 0.02;
  double lr_min = 1e-5, lr_max = 1e-2;
};

// sum_t gamma^t R_t
double discounted_return(const std::vector<double>& rewards, double gamma);

struct GaeResult {
  VectorXf advantages;     // normalized (mean 0, std 1) over the batch
  VectorXf raw_advantages;
  VectorXf value_targets;  // raw advantages + values
};

GaeResult gae(const RolloutBuffer& buffer, double gamma, double lambda);

struct UpdateStats {
  double policy_loss = 0.0;
  double value_loss = 0.0;
  double entropy = 0.0;
  double clip_fraction = 0.0;
  double approx_kl = 0.0;
  double learning_rate = 0.0;
};

// Adam over the flat parameter vector.
class Adam {
 public:
  Adam() = default;
  explicit Adam(int param_count);
  void step(VectorXf& params, const VectorXf& grad, double lr);

  int64_t t() const { return t_; }
  VectorXf& m() { return m_; }
  VectorXf& v() { return v_; }
  const VectorXf& m() const { return m_; }
  const VectorXf& v() const { return v_; }
  void set_t(int64_t t) { t_ = t; }

 private:
  VectorXf m_, v_;
  int64_t t_ = 0;
};

// One PPO update: clipped-surrogate policy loss, value MSE, entropy bonus,
// exact backpropagation, global gradient-norm clipping, Adam. `workers`
// splits each minibatch gradient computation; the reduction order is fixed,
// so results do not depend on timing. Throws std::runtime_error if a loss
// turns non-finite.
UpdateStats update(PolicyParams& params, Adam& adam, const RolloutBuffer& buffer,
                   PpoHyper& hyper, math::RngStream& rng, int workers = 1);

// Gradient of the PPO loss for a set of samples; exposed for the
// finite-difference checks.
struct LossInputs {
  const MatrixXf* obs;
  const MatrixXf* actions;
  const VectorXf* old_log_probs;
  const VectorXf* advantages;
  const VectorXf* value_targets;
};

double ppo_loss(const PolicyParams& params, const LossInputs& in, const PpoHyper& hyper,
                const std::vector<int>& indices);

void ppo_loss_gradient(const PolicyParams& params, const LossInputs& in, const PpoHyper& hyper,
                       const std::vector<int>& indices, VectorXf& grad, UpdateStats& stats,
                       int workers = 1);

}  // namespace qj::ppo
