#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace qj {

using Vector12d = Eigen::Matrix<double, 12, 1>;
using Vector18d = Eigen::Matrix<double, 18, 1>;
using Matrix18d = Eigen::Matrix<double, 18, 18>;
using Matrix3x18d = Eigen::Matrix<double, 3, 18>;

}  // namespace qj
