#pragma once

#include <array>

#include "quadjump/physics/terrain.hpp"

namespace qj::phys {

struct ContactParams {
  double k_normal = 2.5e3;             // [N/m]
  double d_normal = 40.0;              // [N s/m]
  double friction = 1.0;               // Coulomb coefficient
  double restitution = 0.0;            // in [0, 1]
  double tangential_stiffness = 1e3;   // viscous regularization slope [N s/m]
  double contact_force_threshold = 1.0;  // flag = 1 iff F_n exceeds this [N]
  // Damping and friction forces are capped at the impulse that would stop
  // this much mass within one step; keeps the explicit stepper stable at
  // any viscous coefficient.
  double stopping_mass = 0.15;  // [kg]
  double dt = 0.005;           // step the caps are computed for [s]
};

struct FootContact {
  Eigen::Vector3d force{0, 0, 0};  // world frame
  bool in_contact = false;
  double penetration = 0.0;  // along the surface normal, >= 0
};

// Penalty (spring-damper) contact for a spherical foot. Separation-phase
// damping is scaled by (1 - restitution). Tangential force is regularized
// Coulomb with |F_t| <= friction * F_n.
FootContact foot_contact(const ContactParams& params, const Terrain& terrain, double foot_radius,
                         const Eigen::Vector3d& foot_center, const Eigen::Vector3d& foot_velocity);

}  // namespace qj::phys
