#include "quadjump/physics/simulator.hpp"

#include <cmath>

namespace qj::phys {

Simulator::Simulator(const robot::RobotModel& model, const ActuatorConfig& actuator,
                     const ContactParams& contact, Terrain terrain, double dt)
    : model_(model),
      tree_(make_tree(model)),
      actuator_(actuator),
      contact_(contact),
      terrain_(std::move(terrain)),
      dt_(dt) {
  if (dt <= 0.0) throw std::invalid_argument("simulator: dt must be positive");
  state_.q = model.q_nom;
  active_command_ = model.q_nom;
}

void Simulator::reset(const SimState& state) {
  state_ = state;
  state_.base_quat.normalize();
  step_count_ = 0;
  command_queue_.clear();
  active_command_ = state.q;
}

void Simulator::queue_command(const Vector12d& q_des, int delay_steps) {
  command_queue_.push_back({step_count_ + std::max(0, delay_steps), q_des});
}

Vector12d Simulator::effective_command() {
  // newest command that has cleared its latency
  for (auto it = command_queue_.rbegin(); it != command_queue_.rend(); ++it) {
    if (it->available_at <= step_count_) {
      active_command_ = it->q_des;
      command_queue_.erase(command_queue_.begin(), it.base());
      break;
    }
  }
  return active_command_;
}

TreeState Simulator::tree_state() const {
  TreeState ts;
  ts.base_pos = state_.base_pos;
  ts.base_quat = state_.base_quat;
  ts.v_world = state_.v_world();
  ts.omega_world = state_.omega_world();
  ts.q = state_.q;
  ts.qd = state_.qd;
  return ts;
}

std::array<Eigen::Vector3d, 4> Simulator::foot_positions() const {
  return robot::fk_feet(model_, {state_.base_pos, state_.base_quat}, state_.q);
}

std::array<Eigen::Vector3d, 4> Simulator::foot_velocities() const {
  const auto kin = tree_kinematics(tree_, tree_state());
  std::array<Eigen::Vector3d, 4> vel;
  for (int leg = 0; leg < 4; ++leg) {
    const auto& calf = kin[3 * leg + 2 + 1];
    const Eigen::Vector3d r = calf.rot * model_.foot_offset;
    vel[leg] = calf.v_origin + calf.omega.cross(r);
  }
  return vel;
}

void Simulator::step() {
  const Vector12d q_des = effective_command();
  step_impl([&](const Vector12d& q, const Vector12d& qd) {
    return pd_torque(actuator_, q_des, q, qd);
  });
}

void Simulator::step_torque(const Vector12d& tau) {
  step_impl([&](const Vector12d&, const Vector12d&) { return tau; });
}

Eigen::VectorXd Simulator::solve_accelerations(const TreeState& ts, const Vector12d& tau) {
  const auto kin = tree_kinematics(tree_, ts);
  std::vector<PointForce> forces;
  forces.reserve(4);
  for (int leg = 0; leg < 4; ++leg) {
    const auto& calf = kin[3 * leg + 2 + 1];
    const Eigen::Vector3d r = calf.rot * model_.foot_offset;
    const Eigen::Vector3d pos = calf.origin + r;
    const Eigen::Vector3d vel = calf.v_origin + calf.omega.cross(r);
    const FootContact fc = foot_contact(contact_, terrain_, model_.collision.foot_radius, pos, vel);
    state_.contacts[leg] = fc.in_contact ? 1 : 0;
    state_.foot_force[leg] = fc.force;
    if (fc.force.squaredNorm() > 0.0) forces.push_back({3 * leg + 2, pos, fc.force});
  }
  return tree_forward_dynamics(tree_, ts, tau, forces, gravity_);
}

// Velocity-Verlet style step (half kick, drift, half kick). Second order in
// dt, which keeps airborne ballistics exact for the constant-gravity part.
template <typename TorqueFn>
void Simulator::step_impl(const TorqueFn& torque_of) {
  TreeState ts = tree_state();
  const Eigen::Vector3d v_old = ts.v_world;

  Vector12d tau = torque_of(ts.q, ts.qd);
  const Eigen::VectorXd a0 = solve_accelerations(ts, tau);

  // half kick
  ts.v_world += 0.5 * dt_ * a0.head<3>();
  ts.omega_world += 0.5 * dt_ * a0.segment<3>(3);
  ts.qd += 0.5 * dt_ * a0.tail<12>();

  // drift
  ts.base_pos += dt_ * ts.v_world;
  ts.base_quat = math::quat_integrate(ts.base_quat, ts.omega_world, dt_);
  ts.q += dt_ * ts.qd;

  // forces at the new configuration, second half kick
  tau = torque_of(ts.q, ts.qd);
  const Eigen::VectorXd a1 = solve_accelerations(ts, tau);
  ts.v_world += 0.5 * dt_ * a1.head<3>();
  ts.omega_world += 0.5 * dt_ * a1.segment<3>(3);
  ts.qd += 0.5 * dt_ * a1.tail<12>();

  state_.base_pos = ts.base_pos;
  state_.base_quat = ts.base_quat;
  state_.q = ts.q;
  state_.qd = ts.qd;
  state_.v = ts.base_quat.rotate_inverse(ts.v_world);
  state_.omega = ts.base_quat.rotate_inverse(ts.omega_world);
  state_.qdd = 0.5 * (a0.tail<12>() + a1.tail<12>());
  state_.vdot_world = (ts.v_world - v_old) / dt_;
  state_.tau = tau;
  state_.time += dt_;
  ++step_count_;

  check_divergence();
}

void Simulator::check_divergence() const {
  constexpr double kLimit = 1e6;
  auto bad = [](double v) { return !std::isfinite(v) || std::abs(v) > kLimit; };
  for (int k = 0; k < 3; ++k) {
    if (bad(state_.base_pos[k])) throw SimDivergence("base_pos");
    if (bad(state_.v[k])) throw SimDivergence("base_velocity");
    if (bad(state_.omega[k])) throw SimDivergence("base_angular_velocity");
  }
  for (int i = 0; i < 12; ++i) {
    if (bad(state_.q[i])) throw SimDivergence("joint_position");
    if (bad(state_.qd[i])) throw SimDivergence("joint_velocity");
  }
}

double Simulator::mechanical_energy() const {
  const auto kin = tree_kinematics(tree_, tree_state());
  double e = kinetic_energy(tree_, kin) + potential_energy(tree_, kin, gravity_);
  const auto feet = foot_positions();
  for (const auto& f : feet) {
    const SurfaceSample surf = terrain_query(terrain_, f.x(), f.y());
    const double depth = -(f.z() - model_.collision.foot_radius - surf.height) * surf.normal.z();
    if (depth > 0.0) e += 0.5 * contact_.k_normal * depth * depth;
  }
  return e;
}

}  // namespace qj::phys
