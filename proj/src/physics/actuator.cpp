#include "quadjump/physics/actuator.hpp"

#include <cmath>

namespace qj::phys {

Vector12d pd_torque(const ActuatorConfig& cfg, const Vector12d& q_des, const Vector12d& q,
                    const Vector12d& qd) {
  Vector12d tau;
  for (int i = 0; i < 12; ++i) {
    double t = cfg.motor_strength * (cfg.kp[i] * (q_des[i] - q[i]) - cfg.kd[i] * qd[i]);
    if (qd[i] > 0.0)
      t -= cfg.joint_friction;
    else if (qd[i] < 0.0)
      t += cfg.joint_friction;
    t -= cfg.joint_damping * qd[i];
    tau[i] = std::clamp(t, -cfg.torque_limit[i], cfg.torque_limit[i]);
  }
  return tau;
}

}  // namespace qj::phys
