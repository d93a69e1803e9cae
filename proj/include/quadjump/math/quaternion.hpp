#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <cmath>
#include <stdexcept>

namespace qj::math {

// Unit quaternion (w, x, y, z) representing a 3D rotation. q and -q denote
// the same rotation; all error metrics here are double-cover aware.
struct UnitQuaternion {
  double w = 1.0, x = 0.0, y = 0.0, z = 0.0;

  UnitQuaternion() = default;
  UnitQuaternion(double w_, double x_, double y_, double z_) : w(w_), x(x_), y(y_), z(z_) {
    normalize();
  }

  static UnitQuaternion identity() { return {}; }

  // exp(0.5 * rotvec): rotation of |rotvec| radians about rotvec/|rotvec|
  static UnitQuaternion from_rotvec(const Eigen::Vector3d& rotvec) {
    const double angle = rotvec.norm();
    UnitQuaternion q;
    if (angle < 1e-12) {
      // second-order series, exact at angle = 0
      q.w = 1.0 - 0.125 * angle * angle;
      const Eigen::Vector3d v = 0.5 * rotvec;
      q.x = v.x();
      q.y = v.y();
      q.z = v.z();
    } else {
      const double half = 0.5 * angle;
      const double s = std::sin(half) / angle;
      q.w = std::cos(half);
      q.x = s * rotvec.x();
      q.y = s * rotvec.y();
      q.z = s * rotvec.z();
    }
    q.normalize();
    return q;
  }

  static UnitQuaternion from_yaw(double yaw) {
    return from_rotvec(Eigen::Vector3d(0.0, 0.0, yaw));
  }

  double norm() const { return std::sqrt(w * w + x * x + y * y + z * z); }

  void normalize() {
    const double n = norm();
    if (n < 1e-12) throw std::invalid_argument("quaternion norm underflow");
    w /= n;
    x /= n;
    y /= n;
    z /= n;
  }

  UnitQuaternion conjugate() const {
    UnitQuaternion q;
    q.w = w;
    q.x = -x;
    q.y = -y;
    q.z = -z;
    return q;
  }

  // Hamilton product this * rhs
  UnitQuaternion operator*(const UnitQuaternion& rhs) const {
    UnitQuaternion q;
    q.w = w * rhs.w - x * rhs.x - y * rhs.y - z * rhs.z;
    q.x = w * rhs.x + x * rhs.w + y * rhs.z - z * rhs.y;
    q.y = w * rhs.y - x * rhs.z + y * rhs.w + z * rhs.x;
    q.z = w * rhs.z + x * rhs.y - y * rhs.x + z * rhs.w;
    q.normalize();
    return q;
  }

  Eigen::Matrix3d rotation_matrix() const {
    Eigen::Matrix3d r;
    const double xx = x * x, yy = y * y, zz = z * z;
    const double wx = w * x, wy = w * y, wz = w * z;
    const double xy = x * y, xz = x * z, yz = y * z;
    r << 1 - 2 * (yy + zz), 2 * (xy - wz), 2 * (xz + wy),
         2 * (xy + wz), 1 - 2 * (xx + zz), 2 * (yz - wx),
         2 * (xz - wy), 2 * (yz + wx), 1 - 2 * (xx + yy);
    return r;
  }

  Eigen::Vector3d rotate(const Eigen::Vector3d& v) const {
    // q * (0, v) * q^-1 expanded
    const Eigen::Vector3d u(x, y, z);
    return v + 2.0 * u.cross(u.cross(v) + w * v);
  }

  Eigen::Vector3d rotate_inverse(const Eigen::Vector3d& v) const {
    const Eigen::Vector3d u(-x, -y, -z);
    return v + 2.0 * u.cross(u.cross(v) + w * v);
  }

  // rotation-vector of this quaternion, magnitude in [0, pi]
  Eigen::Vector3d log() const {
    double qw = w;
    Eigen::Vector3d v(x, y, z);
    if (qw < 0.0) {  // shorter arc of the double cover
      qw = -qw;
      v = -v;
    }
    const double vn = v.norm();
    if (vn < 1e-12) return 2.0 * v;  // angle ~ 0, 2*v is exact to O(angle^3)
    const double angle = 2.0 * std::atan2(vn, qw);
    return (angle / vn) * v;
  }

  double yaw() const {
    const Eigen::Vector3d fwd = rotate(Eigen::Vector3d::UnitX());
    return std::atan2(fwd.y(), fwd.x());
  }

  Eigen::Vector4d coeffs_wxyz() const { return {w, x, y, z}; }
};

inline void require_unit(const UnitQuaternion& q, const char* who) {
  if (std::abs(q.norm() - 1.0) > 1e-6)
    throw std::invalid_argument(std::string(who) + ": quaternion not unit-norm");
}

// Rotation vector of a^-1 * b; zero iff a and b are the same rotation
// (including a == -b).
inline Eigen::Vector3d quat_log_error(const UnitQuaternion& a, const UnitQuaternion& b) {
  require_unit(a, "quat_log_error");
  require_unit(b, "quat_log_error");
  return (a.conjugate() * b).log();
}

// Integrate a body-rate over dt using the exact rotation exponential.
inline UnitQuaternion quat_integrate(const UnitQuaternion& q, const Eigen::Vector3d& omega_world,
                                     double dt) {
  if (omega_world.squaredNorm() == 0.0) return q;
  return UnitQuaternion::from_rotvec(omega_world * dt) * q;
}

}  // namespace qj::math
