#pragma once

#include "quadjump/types.hpp"

namespace qj::phys {

struct ActuatorConfig {
  Vector12d kp = Vector12d::Constant(35.0);
  Vector12d kd = Vector12d::Constant(1.0);
  Vector12d torque_limit = Vector12d::Constant(33.5);
  double motor_strength = 1.0;     // multiplies the PD output
  double joint_friction = 0.0;     // Coulomb [N m]
  double joint_damping = 0.0;      // viscous [N m s / rad]
};

// tau = clamp(strength * (Kp (q_des - q) - Kd qd) - friction sign(qd) - damping qd, +-limit)
Vector12d pd_torque(const ActuatorConfig& cfg, const Vector12d& q_des, const Vector12d& q,
                    const Vector12d& qd);

}  // namespace qj::phys
