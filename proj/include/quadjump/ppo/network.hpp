#pragma once

#include <Eigen/Core>

#include <vector>

#include "quadjump/math/rng.hpp"

namespace qj::ppo {

using MatrixXf = Eigen::MatrixXf;
using VectorXf = Eigen::VectorXf;

// Shared-trunk MLP: obs -> hidden layers with ELU -> linear action-mean and
// value heads, plus a state-independent log-std vector. All parameters live
// in one flat float32 vector; the accessors below are views into it.
class PolicyParams {
 public:
  PolicyParams() = default;
  PolicyParams(int obs_dim, int act_dim, std::vector<int> hidden);

  static PolicyParams init(int obs_dim, int act_dim, std::vector<int> hidden,
                           double init_log_std, math::RngStream& rng);

  int obs_dim() const { return obs_dim_; }
  int act_dim() const { return act_dim_; }
  const std::vector<int>& hidden() const { return hidden_; }
  int num_layers() const { return static_cast<int>(hidden_.size()); }
  int param_count() const { return static_cast<int>(flat_.size()); }

  VectorXf& flat() { return flat_; }
  const VectorXf& flat() const { return flat_; }

  Eigen::Map<MatrixXf> w(int layer);
  Eigen::Map<VectorXf> b(int layer);
  Eigen::Map<MatrixXf> w_action();
  Eigen::Map<VectorXf> b_action();
  Eigen::Map<MatrixXf> w_value();
  Eigen::Map<VectorXf> b_value();
  Eigen::Map<VectorXf> log_std();
  Eigen::Map<const MatrixXf> w(int layer) const;
  Eigen::Map<const VectorXf> b(int layer) const;
  Eigen::Map<const MatrixXf> w_action() const;
  Eigen::Map<const VectorXf> b_action() const;
  Eigen::Map<const MatrixXf> w_value() const;
  Eigen::Map<const VectorXf> b_value() const;
  Eigen::Map<const VectorXf> log_std() const;

  bool same_shape(const PolicyParams& other) const {
    return obs_dim_ == other.obs_dim_ && act_dim_ == other.act_dim_ && hidden_ == other.hidden_;
  }

 private:
  friend struct ParamLayout;
  int obs_dim_ = 0, act_dim_ = 0;
  std::vector<int> hidden_;
  std::vector<int> offsets_;  // per tensor, computed once
  VectorXf flat_;
};

// Batch activations kept for backpropagation. Batch samples are columns.
struct ForwardCache {
  MatrixXf obs;                 // obs_dim x B
  std::vector<MatrixXf> z, h;   // per trunk layer
  MatrixXf mean;                // act_dim x B
  VectorXf value;               // B
};

// Deterministic forward pass; returns action means and values for a batch
// of observations (columns).
void forward(const PolicyParams& params, const MatrixXf& obs, MatrixXf& mean, VectorXf& value,
             ForwardCache* cache = nullptr);

// Diagonal-Gaussian sampling: action = mean + exp(log_std) * zeta.
// Consumes 2 counter steps per action dimension.
VectorXf sample_action(const VectorXf& mean, const VectorXf& log_std_vec, math::RngStream& rng);

double log_prob(const VectorXf& mean, const VectorXf& log_std_vec, const VectorXf& action);

// Gaussian entropy: sum(log_std) + d/2 (1 + ln 2 pi).
double entropy(const VectorXf& log_std_vec);

}  // namespace qj::ppo
