#include "quadjump/physics/contact.hpp"

#include <algorithm>
#include <cmath>

namespace qj::phys {

FootContact foot_contact(const ContactParams& params, const Terrain& terrain, double foot_radius,
                         const Eigen::Vector3d& foot_center, const Eigen::Vector3d& foot_velocity) {
  FootContact out;
  const SurfaceSample surf = terrain_query(terrain, foot_center.x(), foot_center.y());
  const Eigen::Vector3d& n = surf.normal;

  // vertical gap projected onto the surface normal
  const double gap = foot_center.z() - foot_radius - surf.height;
  const double depth = -gap * n.z();
  if (depth <= 0.0) return out;
  out.penetration = depth;

  const double stop_gain = params.stopping_mass / params.dt;  // one-step stopping slope
  const double depth_rate = -foot_velocity.dot(n);  // > 0 while compressing
  const double damping =
      depth_rate >= 0.0 ? params.d_normal : params.d_normal * (1.0 - params.restitution);
  const double damping_force =
      std::copysign(std::min(damping, stop_gain) * std::abs(depth_rate), depth_rate);
  const double f_n = std::max(0.0, params.k_normal * depth + damping_force);
  if (f_n <= 0.0) return out;

  Eigen::Vector3d v_t = foot_velocity - foot_velocity.dot(n) * n;
  const double speed = v_t.norm();
  Eigen::Vector3d f_t = Eigen::Vector3d::Zero();
  if (speed > 1e-9) {
    const double magnitude = std::min({params.tangential_stiffness * speed,
                                       stop_gain * speed, params.friction * f_n});
    f_t = -(magnitude / speed) * v_t;
  }

  out.force = f_n * n + f_t;
  out.in_contact = f_n > params.contact_force_threshold;
  return out;
}

}  // namespace qj::phys
