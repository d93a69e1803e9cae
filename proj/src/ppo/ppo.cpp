#include "quadjump/ppo/ppo.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace qj::ppo {

RolloutBuffer::RolloutBuffer(int n_envs_, int horizon_, int obs_dim, int act_dim)
    : n_envs(n_envs_), horizon(horizon_) {
  const int n = n_envs * horizon;
  obs.setZero(obs_dim, n);
  actions.setZero(act_dim, n);
  log_probs.setZero(n);
  rewards.setZero(n);
  values.setZero(n);
  dones.setZero(n);
  bootstrap_value.setZero(n_envs);
}

double discounted_return(const std::vector<double>& rewards, double gamma) {
  double weight = 1.0, sum = 0.0;
  for (double r : rewards) {
    sum += weight * r;
    weight *= gamma;
  }
  return sum;
}

GaeResult gae(const RolloutBuffer& buffer, double gamma, double lambda) {
  GaeResult out;
  const int n = buffer.size();
  out.raw_advantages.setZero(n);
  for (int env = 0; env < buffer.n_envs; ++env) {
    float last_adv = 0.f;
    for (int step = buffer.horizon - 1; step >= 0; --step) {
      const int i = buffer.index(step, env);
      const float next_value = step == buffer.horizon - 1
                                   ? buffer.bootstrap_value[env]
                                   : buffer.values[buffer.index(step + 1, env)];
      const float nonterminal = 1.f - buffer.dones[i];
      const float delta =
          buffer.rewards[i] + static_cast<float>(gamma) * next_value * nonterminal -
          buffer.values[i];
      last_adv = delta + static_cast<float>(gamma * lambda) * nonterminal * last_adv;
      out.raw_advantages[i] = last_adv;
    }
  }
  out.value_targets = out.raw_advantages + buffer.values;
  const float mean = out.raw_advantages.mean();
  const float stddev =
      std::sqrt((out.raw_advantages.array() - mean).square().sum() / std::max(1, n - 1));
  out.advantages = (out.raw_advantages.array() - mean).matrix() / (stddev + 1e-8f);
  return out;
}

Adam::Adam(int param_count) {
  m_.setZero(param_count);
  v_.setZero(param_count);
}

void Adam::step(VectorXf& params, const VectorXf& grad, double lr) {
  constexpr float beta1 = 0.9f, beta2 = 0.999f, eps = 1e-8f;
  ++t_;
  m_ = beta1 * m_ + (1.f - beta1) * grad;
  v_ = beta2 * v_.array().matrix() + (1.f - beta2) * grad.cwiseProduct(grad);
  const double bias1 = 1.0 - std::pow(beta1, static_cast<double>(t_));
  const double bias2 = 1.0 - std::pow(beta2, static_cast<double>(t_));
  const float step_size = static_cast<float>(lr / bias1);
  const float denom_scale = static_cast<float>(1.0 / std::sqrt(bias2));
  params.array() -=
      step_size * m_.array() / (v_.array().sqrt() * denom_scale + eps);
}

namespace {

struct SliceResult {
  PolicyParams grad;  // used as a shaped container
  double policy_loss = 0.0;
  double value_loss = 0.0;
  double kl = 0.0;
  double clipped = 0.0;
};

// Gradient and stats for a contiguous slice of the minibatch.
void slice_gradient(const PolicyParams& params, const LossInputs& in, const PpoHyper& hyper,
                    const std::vector<int>& indices, size_t begin, size_t end, int total,
                    SliceResult& out) {
  const int mb = static_cast<int>(end - begin);
  const int obs_dim = params.obs_dim();
  const int act_dim = params.act_dim();

  MatrixXf obs(obs_dim, mb), actions(act_dim, mb);
  VectorXf old_logp(mb), adv(mb), targets(mb);
  for (int j = 0; j < mb; ++j) {
    const int src = indices[begin + j];
    obs.col(j) = in.obs->col(src);
    actions.col(j) = in.actions->col(src);
    old_logp[j] = (*in.old_log_probs)[src];
    adv[j] = (*in.advantages)[src];
    targets[j] = (*in.value_targets)[src];
  }

  ForwardCache cache;
  MatrixXf mean;
  VectorXf value;
  forward(params, obs, mean, value, &cache);

  const auto log_std = params.log_std();
  VectorXf sigma(act_dim), inv_var(act_dim);
  for (int k = 0; k < act_dim; ++k) {
    sigma[k] = std::exp(log_std[k]);
    inv_var[k] = 1.f / (sigma[k] * sigma[k]);
  }

  MatrixXf dmean = MatrixXf::Zero(act_dim, mb);
  VectorXf dvalue(mb);
  VectorXf dlogstd = VectorXf::Zero(act_dim);
  const double inv_total = 1.0 / total;

  for (int j = 0; j < mb; ++j) {
    double logp = -0.5 * 1.8378770664093453 * act_dim;
    for (int k = 0; k < act_dim; ++k) {
      const double zeta = (actions(k, j) - mean(k, j)) / sigma[k];
      logp -= 0.5 * zeta * zeta + log_std[k];
    }
    const double log_ratio = logp - old_logp[j];
    const double ratio = std::exp(log_ratio);
    const double a = adv[j];
    const double unclipped = -ratio * a;
    const double clipped =
        -std::clamp(ratio, 1.0 - hyper.clip_epsilon, 1.0 + hyper.clip_epsilon) * a;
    const bool use_unclipped = unclipped >= clipped;
    out.policy_loss += std::max(unclipped, clipped) * inv_total;
    out.kl += ((ratio - 1.0) - log_ratio) * inv_total;
    out.clipped += (std::abs(ratio - 1.0) > hyper.clip_epsilon ? 1.0 : 0.0) * inv_total;

    const double dlogp = use_unclipped ? -ratio * a * inv_total : 0.0;
    if (dlogp != 0.0) {
      for (int k = 0; k < act_dim; ++k) {
        const float diff = actions(k, j) - mean(k, j);
        dmean(k, j) = static_cast<float>(dlogp) * diff * inv_var[k];
        dlogstd[k] += static_cast<float>(dlogp * (diff * diff * inv_var[k] - 1.0));
      }
    }

    const double verr = value[j] - targets[j];
    out.value_loss += hyper.value_coef * verr * verr * inv_total;
    dvalue[j] = static_cast<float>(2.0 * hyper.value_coef * verr * inv_total);
  }
  // entropy bonus only touches log_std; the term is constant over the batch
  dlogstd.array() -=
      static_cast<float>(hyper.entropy_coef) * static_cast<float>(mb) * inv_total;

  // backward through the heads and trunk
  out.grad = PolicyParams(obs_dim, act_dim, params.hidden());
  const MatrixXf& h_last = cache.h.back();
  out.grad.w_action() = dmean * h_last.transpose();
  out.grad.b_action() = dmean.rowwise().sum();
  out.grad.w_value() = (dvalue.transpose() * h_last.transpose()).eval();
  out.grad.b_value()[0] = dvalue.sum();
  out.grad.log_std() = dlogstd;

  MatrixXf dh = params.w_action().transpose() * dmean;
  dh.noalias() += params.w_value().transpose() * dvalue.transpose();
  for (int l = params.num_layers() - 1; l >= 0; --l) {
    // d elu(z) = 1 for z > 0, exp(z) otherwise
    MatrixXf dz = dh.cwiseProduct(
        cache.z[l].unaryExpr([](float z) { return z > 0.f ? 1.f : std::exp(z); }));
    const MatrixXf& h_prev = l == 0 ? cache.obs : cache.h[l - 1];
    out.grad.w(l) = dz * h_prev.transpose();
    out.grad.b(l) = dz.rowwise().sum();
    if (l > 0) dh = params.w(l).transpose() * dz;
  }
}

}  // namespace

double ppo_loss(const PolicyParams& params, const LossInputs& in, const PpoHyper& hyper,
                const std::vector<int>& indices) {
  const int mb = static_cast<int>(indices.size());
  MatrixXf obs(params.obs_dim(), mb), actions(params.act_dim(), mb);
  for (int j = 0; j < mb; ++j) {
    obs.col(j) = in.obs->col(indices[j]);
    actions.col(j) = in.actions->col(indices[j]);
  }
  MatrixXf mean;
  VectorXf value;
  forward(params, obs, mean, value);

  const auto log_std = params.log_std();
  double loss = 0.0;
  for (int j = 0; j < mb; ++j) {
    VectorXf m = mean.col(j);
    const double logp = log_prob(m, log_std, actions.col(j));
    const double ratio = std::exp(logp - (*in.old_log_probs)[indices[j]]);
    const double a = (*in.advantages)[indices[j]];
    const double clipped =
        std::clamp(ratio, 1.0 - hyper.clip_epsilon, 1.0 + hyper.clip_epsilon);
    loss += std::max(-ratio * a, -clipped * a) / mb;
    const double verr = value[j] - (*in.value_targets)[indices[j]];
    loss += hyper.value_coef * verr * verr / mb;
  }
  loss -= hyper.entropy_coef * entropy(log_std);
  return loss;
}

void ppo_loss_gradient(const PolicyParams& params, const LossInputs& in, const PpoHyper& hyper,
                       const std::vector<int>& indices, VectorXf& grad, UpdateStats& stats,
                       int workers) {
  const int total = static_cast<int>(indices.size());
  workers = std::max(1, std::min<int>(workers, total));
  std::vector<SliceResult> results(workers);
  if (workers == 1) {
    slice_gradient(params, in, hyper, indices, 0, total, total, results[0]);
  } else {
    std::vector<std::thread> threads;
    const size_t chunk = (total + workers - 1) / workers;
    for (int t = 0; t < workers; ++t) {
      const size_t begin = t * chunk;
      const size_t end = std::min<size_t>(begin + chunk, total);
      threads.emplace_back([&, t, begin, end]() {
        if (begin < end)
          slice_gradient(params, in, hyper, indices, begin, end, total, results[t]);
      });
    }
    for (auto& th : threads) th.join();
  }

  grad.setZero(params.param_count());
  stats = UpdateStats{};
  for (const SliceResult& r : results) {  // fixed order merge
    if (r.grad.param_count() > 0) grad += r.grad.flat();
    stats.policy_loss += r.policy_loss;
    stats.value_loss += r.value_loss;
    stats.approx_kl += r.kl;
    stats.clip_fraction += r.clipped;
  }
  // entropy bonus gradient is already inside the slices; report its value
  stats.entropy = entropy(params.log_std());
}

UpdateStats update(PolicyParams& params, Adam& adam, const RolloutBuffer& buffer, PpoHyper& hyper,
                   math::RngStream& rng, int workers) {
  const GaeResult g = gae(buffer, hyper.gamma, hyper.gae_lambda);
  LossInputs in{&buffer.obs, &buffer.actions, &buffer.log_probs, &g.advantages,
                &g.value_targets};

  const int n = buffer.size();
  std::vector<int> order(n);
  for (int i = 0; i < n; ++i) order[i] = i;

  UpdateStats total_stats;
  int updates = 0;
  double lr = hyper.learning_rate;
  VectorXf grad(params.param_count());

  for (int epoch = 0; epoch < hyper.epochs; ++epoch) {
    // Fisher-Yates with the counter-based stream
    for (int i = n - 1; i > 0; --i)
      std::swap(order[i], order[static_cast<int>(rng.uniform_int(i + 1))]);

    const int mb_size = n / hyper.minibatches;
    for (int mb = 0; mb < hyper.minibatches; ++mb) {
      std::vector<int> idx(order.begin() + mb * mb_size,
                           order.begin() + (mb + 1) * mb_size);
      UpdateStats stats;
      ppo_loss_gradient(params, in, hyper, idx, grad, stats, workers);

      if (!std::isfinite(stats.policy_loss) || !std::isfinite(stats.value_loss) ||
          !grad.allFinite()) {
        std::ostringstream msg;
        msg << "ppo: non-finite loss (epoch " << epoch << ", minibatch " << mb
            << ", policy_loss " << stats.policy_loss << ", value_loss " << stats.value_loss
            << "); update aborted";
        throw std::runtime_error(msg.str());
      }

      if (hyper.adaptive_lr) {
        if (stats.approx_kl > 2.0 * hyper.desired_kl)
          lr = std::max(hyper.lr_min, lr / 1.5);
        else if (stats.approx_kl >= 0.0 && stats.approx_kl < hyper.desired_kl / 2.0)
          lr = std::min(hyper.lr_max, lr * 1.5);
      }

      const float norm = grad.norm();
      if (norm > hyper.max_grad_norm) grad *= static_cast<float>(hyper.max_grad_norm) / norm;
      adam.step(params.flat(), grad, lr);

      total_stats.policy_loss += stats.policy_loss;
      total_stats.value_loss += stats.value_loss;
      total_stats.entropy += stats.entropy;
      total_stats.clip_fraction += stats.clip_fraction;
      total_stats.approx_kl += stats.approx_kl;
      ++updates;
    }
  }

  hyper.learning_rate = lr;  // persists across updates
  const double inv = updates > 0 ? 1.0 / updates : 0.0;
  total_stats.policy_loss *= inv;
  total_stats.value_loss *= inv;
  total_stats.entropy *= inv;
  total_stats.clip_fraction *= inv;
  total_stats.approx_kl *= inv;
  total_stats.learning_rate = lr;
  return total_stats;
}

}  // namespace qj::ppo
