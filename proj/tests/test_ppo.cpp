#include <doctest.h>

#include <cmath>

#include "quadjump/ppo/ppo.hpp"

using namespace qj;
using namespace qj::ppo;

namespace {

RolloutBuffer random_buffer(int n_envs, int horizon, int obs_dim, int act_dim,
                            math::RngStream& rng) {
  RolloutBuffer buf(n_envs, horizon, obs_dim, act_dim);
  for (int i = 0; i < buf.size(); ++i) {
    for (int k = 0; k < obs_dim; ++k) buf.obs(k, i) = static_cast<float>(rng.normal());
    for (int k = 0; k < act_dim; ++k) buf.actions(k, i) = static_cast<float>(rng.normal());
    buf.rewards[i] = static_cast<float>(rng.uniform(-1, 1));
    buf.values[i] = static_cast<float>(rng.uniform(-1, 1));
    buf.dones[i] = rng.uniform() < 0.1 ? 1.f : 0.f;
  }
  for (int e = 0; e < n_envs; ++e) buf.bootstrap_value[e] = static_cast<float>(rng.uniform(-1, 1));
  return buf;
}

}  // namespace

TEST_CASE("forward: zero parameters give zero outputs") {
  PolicyParams p(8, 3, {16, 8});
  MatrixXf obs = MatrixXf::Random(8, 5);
  MatrixXf mean;
  VectorXf value;
  forward(p, obs, mean, value);
  CHECK(mean.norm() == 0.f);
  CHECK(value.norm() == 0.f);
}

TEST_CASE("forward matches hand arithmetic on a single-unit net") {
  PolicyParams p(1, 1, {1});
  p.w(0)(0, 0) = 0.5f;
  p.b(0)[0] = 0.1f;
  p.w_action()(0, 0) = 2.0f;
  p.b_action()[0] = 0.3f;
  p.w_value()(0, 0) = -1.0f;
  p.b_value()[0] = 0.2f;

  MatrixXf obs(1, 2);
  obs << 0.7f, -1.0f;
  MatrixXf mean;
  VectorXf value;
  forward(p, obs, mean, value);

  // x = 0.7: z = 0.45 > 0, h = 0.45
  CHECK(mean(0, 0) == doctest::Approx(2.0 * 0.45 + 0.3).epsilon(1e-7));
  CHECK(value[0] == doctest::Approx(-0.45 + 0.2).epsilon(1e-7));
  // x = -1: z = -0.4, elu = exp(-0.4) - 1
  const double h = std::exp(-0.4) - 1.0;
  CHECK(mean(0, 1) == doctest::Approx(2.0 * h + 0.3).epsilon(1e-6));
  CHECK(value[1] == doctest::Approx(-h + 0.2).epsilon(1e-6));
}

TEST_CASE("batched and one-by-one evaluation agree") {
  math::RngStream rng(157, 0);
  PolicyParams p = PolicyParams::init(10, 4, {32, 16}, -0.2, rng);
  MatrixXf obs = MatrixXf::Random(10, 7);
  MatrixXf mean_batch;
  VectorXf value_batch;
  forward(p, obs, mean_batch, value_batch);
  for (int i = 0; i < 7; ++i) {
    MatrixXf mean1;
    VectorXf value1;
    forward(p, obs.col(i), mean1, value1);
    CHECK((mean1.col(0) - mean_batch.col(i)).norm() <= 1e-7f);
    CHECK(std::abs(value1[0] - value_batch[i]) <= 1e-7f);
  }
}

TEST_CASE("gaussian head: log-prob value, deterministic limit, replay") {
  VectorXf mean = VectorXf::Zero(12);
  VectorXf log_std = VectorXf::Zero(12);  // sigma = 1
  CHECK(log_prob(mean, log_std, mean) == doctest::Approx(-11.0272).epsilon(1e-4));

  // vanishing sigma collapses onto the mean
  VectorXf tiny = VectorXf::Constant(12, -40.f);
  math::RngStream rng(163, 0);
  const VectorXf a = sample_action(mean, tiny, rng);
  CHECK((a - mean).norm() <= 1e-12f);

  math::RngStream r1(5, 9), r2(5, 9);
  VectorXf wide = VectorXf::Zero(12);
  const VectorXf s1 = sample_action(mean, wide, r1);
  const VectorXf s2 = sample_action(mean, wide, r2);
  CHECK((s1 - s2).norm() == 0.f);

  CHECK(entropy(log_std) == doctest::Approx(12 * 0.5 * (1.0 + std::log(2 * M_PI))).epsilon(1e-9));
}

TEST_CASE("discounted return") {
  CHECK(discounted_return({1, 1, 1}, 0.5) == doctest::Approx(1.75).epsilon(1e-12));
  CHECK(discounted_return({}, 0.9) == 0.0);
  CHECK(discounted_return({3.0, 100.0}, 1e-12) == doctest::Approx(3.0).epsilon(1e-9));
}

TEST_CASE("gae: reductions and brute-force oracle") {
  math::RngStream rng(167, 0);

  SUBCASE("lambda=1, gamma=1, V=0 equals reward-to-go exactly") {
    RolloutBuffer buf(1, 10, 1, 1);
    for (int t = 0; t < 10; ++t) buf.rewards[t] = static_cast<float>(t % 3 - 1);
    const GaeResult g = gae(buf, 1.0, 1.0);
    float tail = 0.f;
    for (int t = 9; t >= 0; --t) {
      tail += buf.rewards[t];
      CHECK(g.raw_advantages[t] == tail);
    }
  }

  SUBCASE("single transition formula") {
    RolloutBuffer buf(1, 1, 1, 1);
    buf.rewards[0] = 1.0f;
    buf.values[0] = 0.5f;
    buf.bootstrap_value[0] = 0.0f;
    const GaeResult g = gae(buf, 0.99, 0.95);
    CHECK(g.raw_advantages[0] == doctest::Approx(0.5).epsilon(1e-6));
    CHECK(g.value_targets[0] == doctest::Approx(1.0).epsilon(1e-6));
  }

  SUBCASE("done masks everything after the boundary") {
    RolloutBuffer buf(1, 6, 1, 1);
    for (int t = 0; t < 6; ++t) {
      buf.rewards[t] = 1.0f;
      buf.values[t] = 0.3f;
    }
    buf.dones[2] = 1.f;
    const GaeResult a = gae(buf, 0.99, 0.95);
    buf.rewards[4] = -50.f;  // after the boundary
    const GaeResult b = gae(buf, 0.99, 0.95);
    for (int t = 0; t <= 2; ++t) CHECK(a.raw_advantages[t] == b.raw_advantages[t]);
  }

  SUBCASE("independent recursion on random sequences") {
    for (int trial = 0; trial < 200; ++trial) {
      RolloutBuffer buf = random_buffer(1, 10, 1, 1, rng);
      const double gamma = rng.uniform(0.9, 1.0), lambda = rng.uniform(0.8, 1.0);
      const GaeResult g = gae(buf, gamma, lambda);
      // brute force: delta then the backward sum written directly
      std::vector<double> adv(10);
      for (int t = 9; t >= 0; --t) {
        const double next_v = t == 9 ? buf.bootstrap_value[0] : buf.values[t + 1];
        const double nonterm = 1.0 - buf.dones[t];
        const double delta = buf.rewards[t] + gamma * next_v * nonterm - buf.values[t];
        adv[t] = delta + (t == 9 ? 0.0 : gamma * lambda * nonterm * adv[t + 1]);
      }
      for (int t = 0; t < 10; ++t)
        CHECK(std::abs(g.raw_advantages[t] - adv[t]) <= 1e-5);
    }
  }

  SUBCASE("normalized advantages have mean 0 and unit std") {
    RolloutBuffer buf = random_buffer(4, 16, 1, 1, rng);
    const GaeResult g = gae(buf, 0.99, 0.95);
    CHECK(g.advantages.mean() == doctest::Approx(0.0).epsilon(1e-5));
    const double var = (g.advantages.array() - g.advantages.mean()).square().sum() /
                       (g.advantages.size() - 1);
    CHECK(std::sqrt(var) == doctest::Approx(1.0).epsilon(1e-3));
  }
}

TEST_CASE("analytic gradient matches central finite differences") {
  math::RngStream rng(173, 0);
  // toy net exercising every layer type
  PolicyParams p = PolicyParams::init(6, 2, {4, 3}, -0.1, rng);
  const int batch = 16;
  MatrixXf obs(6, batch), actions(2, batch);
  VectorXf old_logp(batch), adv(batch), targets(batch);
  for (int j = 0; j < batch; ++j) {
    for (int k = 0; k < 6; ++k) obs(k, j) = static_cast<float>(rng.normal());
    for (int k = 0; k < 2; ++k) actions(k, j) = static_cast<float>(rng.normal());
    adv[j] = static_cast<float>(rng.normal());
    targets[j] = static_cast<float>(rng.normal());
  }
  {  // old log-probs from the current policy, mildly perturbed
    MatrixXf mean;
    VectorXf value;
    forward(p, obs, mean, value);
    for (int j = 0; j < batch; ++j)
      old_logp[j] = static_cast<float>(
          log_prob(mean.col(j), p.log_std(), actions.col(j)) + 0.1 * rng.normal());
  }
  LossInputs in{&obs, &actions, &old_logp, &adv, &targets};
  PpoHyper hyper;
  std::vector<int> idx(batch);
  for (int i = 0; i < batch; ++i) idx[i] = i;

  VectorXf grad;
  UpdateStats stats;
  ppo_loss_gradient(p, in, hyper, idx, grad, stats, 2);

  VectorXf fd(p.param_count());
  const float h = 1e-3f;
  for (int k = 0; k < p.param_count(); ++k) {
    const float saved = p.flat()[k];
    p.flat()[k] = saved + h;
    const double up = ppo_loss(p, in, hyper, idx);
    p.flat()[k] = saved - h;
    const double down = ppo_loss(p, in, hyper, idx);
    p.flat()[k] = saved;
    fd[k] = static_cast<float>((up - down) / (2.0 * h));
  }
  const double rel = (grad - fd).norm() / std::max(1e-12f, fd.norm());
  CHECK(rel < 1e-3);
}

TEST_CASE("update: on-policy identity and zero learning rate") {
  math::RngStream rng(179, 0);
  PolicyParams p = PolicyParams::init(5, 2, {8}, -0.2, rng);
  RolloutBuffer buf = random_buffer(4, 8, 5, 2, rng);
  {  // actions drawn from the current policy, log-probs exact
    MatrixXf mean;
    VectorXf value;
    forward(p, buf.obs, mean, value);
    math::RngStream act_rng(7, 1);
    for (int i = 0; i < buf.size(); ++i) {
      const VectorXf a = sample_action(mean.col(i), p.log_std(), act_rng);
      buf.actions.col(i) = a;
      buf.log_probs[i] = static_cast<float>(log_prob(mean.col(i), p.log_std(), a));
      buf.values[i] = value[i];
    }
  }

  PpoHyper hyper;
  hyper.learning_rate = 0.0;
  hyper.adaptive_lr = false;
  hyper.epochs = 1;
  hyper.minibatches = 1;
  Adam adam(p.param_count());
  const VectorXf before = p.flat();
  math::RngStream shuffle(11, 2);
  const UpdateStats stats = update(p, adam, buf, hyper, shuffle, 2);

  CHECK((p.flat() - before).norm() == 0.f);  // bitwise unchanged
  CHECK(stats.clip_fraction == 0.0);
  CHECK(std::abs(stats.approx_kl) < 1e-6);
}

TEST_CASE("update learns and stays finite") {
  math::RngStream rng(181, 0);
  PolicyParams p = PolicyParams::init(5, 2, {16, 8}, 0.0, rng);
  PpoHyper hyper;
  hyper.adaptive_lr = false;
  hyper.learning_rate = 1e-3;
  Adam adam(p.param_count());
  math::RngStream shuffle(13, 2);
  for (int iter = 0; iter < 5; ++iter) {
    RolloutBuffer buf = random_buffer(8, 16, 5, 2, rng);
    {
      MatrixXf mean;
      VectorXf value;
      forward(p, buf.obs, mean, value);
      math::RngStream act_rng(70 + iter, 1);
      for (int i = 0; i < buf.size(); ++i) {
        const VectorXf a = sample_action(mean.col(i), p.log_std(), act_rng);
        buf.actions.col(i) = a;
        buf.log_probs[i] = static_cast<float>(log_prob(mean.col(i), p.log_std(), a));
        buf.values[i] = value[i];
      }
    }
    update(p, adam, buf, hyper, shuffle, 1);
    CHECK(p.flat().allFinite());
  }
}

TEST_CASE("worker count does not change the gradient") {
  math::RngStream rng(191, 0);
  PolicyParams p = PolicyParams::init(6, 3, {8}, -0.1, rng);
  const int batch = 24;
  MatrixXf obs(6, batch), actions(3, batch);
  VectorXf old_logp(batch), adv(batch), targets(batch);
  for (int j = 0; j < batch; ++j) {
    for (int k = 0; k < 6; ++k) obs(k, j) = static_cast<float>(rng.normal());
    for (int k = 0; k < 3; ++k) actions(k, j) = static_cast<float>(rng.normal());
    old_logp[j] = static_cast<float>(rng.normal());
    adv[j] = static_cast<float>(rng.normal());
    targets[j] = static_cast<float>(rng.normal());
  }
  LossInputs in{&obs, &actions, &old_logp, &adv, &targets};
  PpoHyper hyper;
  std::vector<int> idx(batch);
  for (int i = 0; i < batch; ++i) idx[i] = i;
  VectorXf g1, g2;
  UpdateStats s1, s2;
  ppo_loss_gradient(p, in, hyper, idx, g1, s1, 1);
  ppo_loss_gradient(p, in, hyper, idx, g2, s2, 3);
  CHECK((g1 - g2).cwiseAbs().maxCoeff() <= 2e-6f);
}
