#include "quadjump/ppo/network.hpp"

#include <cmath>
#include <stdexcept>

namespace qj::ppo {

namespace {
constexpr double kLog2Pi = 1.8378770664093454835606594728112;

void elu_inplace(MatrixXf& m) {
  m = m.unaryExpr([](float z) { return z > 0.f ? z : std::expm1(z); });
}
}  // namespace

PolicyParams::PolicyParams(int obs_dim, int act_dim, std::vector<int> hidden)
    : obs_dim_(obs_dim), act_dim_(act_dim), hidden_(std::move(hidden)) {
  if (obs_dim_ <= 0 || act_dim_ <= 0 || hidden_.empty())
    throw std::invalid_argument("policy: bad shape");
  int at = 0;
  int prev = obs_dim_;
  for (int width : hidden_) {
    offsets_.push_back(at);
    at += width * prev;  // W
    offsets_.push_back(at);
    at += width;  // b
    prev = width;
  }
  offsets_.push_back(at);
  at += act_dim_ * prev;  // action W
  offsets_.push_back(at);
  at += act_dim_;  // action b
  offsets_.push_back(at);
  at += prev;  // value W (1 x prev)
  offsets_.push_back(at);
  at += 1;  // value b
  offsets_.push_back(at);
  at += act_dim_;  // log_std
  flat_ = VectorXf::Zero(at);
}

PolicyParams PolicyParams::init(int obs_dim, int act_dim, std::vector<int> hidden,
                                double init_log_std, math::RngStream& rng) {
  PolicyParams p(obs_dim, act_dim, std::move(hidden));
  auto fill = [&rng](Eigen::Map<MatrixXf> m, double scale) {
    const double limit = scale * std::sqrt(6.0 / (m.rows() + m.cols()));
    for (int c = 0; c < m.cols(); ++c)
      for (int r = 0; r < m.rows(); ++r)
        m(r, c) = static_cast<float>(rng.uniform(-limit, limit));
  };
  for (int l = 0; l < p.num_layers(); ++l) fill(p.w(l), 1.0);
  fill(p.w_action(), 0.01);  // near-zero initial policy mean
  fill(p.w_value(), 1.0);
  p.log_std().setConstant(static_cast<float>(init_log_std));
  return p;
}

Eigen::Map<MatrixXf> PolicyParams::w(int layer) {
  const int prev = layer == 0 ? obs_dim_ : hidden_[layer - 1];
  return {flat_.data() + offsets_[2 * layer], hidden_[layer], prev};
}
Eigen::Map<VectorXf> PolicyParams::b(int layer) {
  return {flat_.data() + offsets_[2 * layer + 1], hidden_[layer]};
}
Eigen::Map<MatrixXf> PolicyParams::w_action() {
  return {flat_.data() + offsets_[2 * num_layers()], act_dim_, hidden_.back()};
}
Eigen::Map<VectorXf> PolicyParams::b_action() {
  return {flat_.data() + offsets_[2 * num_layers() + 1], act_dim_};
}
Eigen::Map<MatrixXf> PolicyParams::w_value() {
  return {flat_.data() + offsets_[2 * num_layers() + 2], 1, hidden_.back()};
}
Eigen::Map<VectorXf> PolicyParams::b_value() {
  return {flat_.data() + offsets_[2 * num_layers() + 3], 1};
}
Eigen::Map<VectorXf> PolicyParams::log_std() {
  return {flat_.data() + offsets_[2 * num_layers() + 4], act_dim_};
}

Eigen::Map<const MatrixXf> PolicyParams::w(int layer) const {
  const int prev = layer == 0 ? obs_dim_ : hidden_[layer - 1];
  return {flat_.data() + offsets_[2 * layer], hidden_[layer], prev};
}
Eigen::Map<const VectorXf> PolicyParams::b(int layer) const {
  return {flat_.data() + offsets_[2 * layer + 1], hidden_[layer]};
}
Eigen::Map<const MatrixXf> PolicyParams::w_action() const {
  return {flat_.data() + offsets_[2 * num_layers()], act_dim_, hidden_.back()};
}
Eigen::Map<const VectorXf> PolicyParams::b_action() const {
  return {flat_.data() + offsets_[2 * num_layers() + 1], act_dim_};
}
Eigen::Map<const MatrixXf> PolicyParams::w_value() const {
  return {flat_.data() + offsets_[2 * num_layers() + 2], 1, hidden_.back()};
}
Eigen::Map<const VectorXf> PolicyParams::b_value() const {
  return {flat_.data() + offsets_[2 * num_layers() + 3], 1};
}
Eigen::Map<const VectorXf> PolicyParams::log_std() const {
  return {flat_.data() + offsets_[2 * num_layers() + 4], act_dim_};
}

void forward(const PolicyParams& params, const MatrixXf& obs, MatrixXf& mean, VectorXf& value,
             ForwardCache* cache) {
  if (obs.rows() != params.obs_dim()) throw std::invalid_argument("forward: observation dim");
  const int layers = params.num_layers();
  MatrixXf h = obs;
  if (cache) {
    cache->obs = obs;
    cache->z.resize(layers);
    cache->h.resize(layers);
  }
  for (int l = 0; l < layers; ++l) {
    MatrixXf z = (params.w(l) * h).colwise() + params.b(l);
    if (cache) cache->z[l] = z;
    elu_inplace(z);
    if (cache) cache->h[l] = z;
    h = std::move(z);
  }
  mean = (params.w_action() * h).colwise() + params.b_action();
  value = ((params.w_value() * h).row(0).transpose().array() + params.b_value()[0]).matrix();
  if (cache) {
    cache->mean = mean;
    cache->value = value;
  }
}

VectorXf sample_action(const VectorXf& mean, const VectorXf& log_std_vec, math::RngStream& rng) {
  VectorXf a(mean.size());
  for (int k = 0; k < mean.size(); ++k)
    a[k] = mean[k] + std::exp(log_std_vec[k]) * static_cast<float>(rng.normal());
  return a;
}

double log_prob(const VectorXf& mean, const VectorXf& log_std_vec, const VectorXf& action) {
  double lp = -0.5 * kLog2Pi * mean.size();
  for (int k = 0; k < mean.size(); ++k) {
    const double s = std::exp(static_cast<double>(log_std_vec[k]));
    const double zeta = (action[k] - mean[k]) / s;
    lp -= 0.5 * zeta * zeta + log_std_vec[k];
  }
  return lp;
}

double entropy(const VectorXf& log_std_vec) {
  return log_std_vec.sum() + 0.5 * log_std_vec.size() * (1.0 + kLog2Pi);
}

}  // namespace qj::ppo
