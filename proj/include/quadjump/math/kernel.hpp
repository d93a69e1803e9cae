#pragma once

#include <cmath>
#include <stdexcept>

namespace qj::math {

// exp(-err_sq / sigma), the squared-error kernel used throughout the reward
// table. Maps [0, inf) onto (0, 1], equal to 1 iff err_sq == 0.
inline double exp_kernel(double err_sq, double sigma) {
  if (sigma <= 0.0) throw std::invalid_argument("exp_kernel: sigma must be positive");
  if (err_sq < 0.0) throw std::invalid_argument("exp_kernel: err_sq must be nonnegative");
  return std::exp(-err_sq / sigma);
}

}  // namespace qj::math
