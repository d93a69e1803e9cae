#pragma once

#include <Eigen/Core>

#include "quadjump/math/kernel.hpp"

namespace qj::env {

// 1-D vertical point mass with thrust: a minimal end-to-end check that the
// optimizer can learn anything at all. Reward peaks when the mass hovers at
// 1 m; the best possible return over an episode is 200.
class HopperEnv {
 public:
  static constexpr int kObsDim = 2;
  static constexpr int kActDim = 1;
  static constexpr int kEpisodeSteps = 200;
  static constexpr double kMass = 1.0;       // [kg]
  static constexpr double kGravity = 9.81;
  static constexpr double kMaxThrust = 20.0; // [N]
  static constexpr double kTargetHeight = 1.0;
  static constexpr double kKernelScale = 0.1;
  static constexpr double kDt = 0.02;

  Eigen::Vector2f reset() {
    z_ = kTargetHeight;
    v_ = 0.0;
    t_ = 0;
    return observation();
  }

  // thrust clipped to [0, kMaxThrust]
  struct Result {
    Eigen::Vector2f obs;
    double reward;
    bool done;
  };

  Result step(double thrust) {
    thrust = std::clamp(thrust, 0.0, kMaxThrust);
    v_ += (thrust / kMass - kGravity) * kDt;
    z_ += v_ * kDt;
    if (z_ < 0.0) {  // resting floor
      z_ = 0.0;
      v_ = 0.0;
    }
    ++t_;
    const double err = z_ - kTargetHeight;
    return {observation(), math::exp_kernel(err * err, kKernelScale), t_ >= kEpisodeSteps};
  }

  double height() const { return z_; }
  double velocity() const { return v_; }

 private:
  Eigen::Vector2f observation() const {
    return {static_cast<float>(z_ - kTargetHeight), static_cast<float>(v_)};
  }

  double z_ = kTargetHeight;
  double v_ = 0.0;
  int t_ = 0;
};

}  // namespace qj::env
