#pragma once

#include <array>
#include <deque>
#include <stdexcept>
#include <string>

#include "quadjump/physics/actuator.hpp"
#include "quadjump/physics/articulated.hpp"
#include "quadjump/physics/contact.hpp"
#include "quadjump/physics/terrain.hpp"
#include "quadjump/robot/model.hpp"

namespace qj::phys {

// Full physical state of one robot. Base linear/angular velocity are
// reported in the base frame; accelerations and forces are world frame.
struct SimState {
  Eigen::Vector3d base_pos{0, 0, 0};
  math::UnitQuaternion base_quat;
  Eigen::Vector3d v{0, 0, 0};      // base frame
  Eigen::Vector3d omega{0, 0, 0};  // base frame
  Vector12d q = Vector12d::Zero();
  Vector12d qd = Vector12d::Zero();
  Vector12d qdd = Vector12d::Zero();
  std::array<int, 4> contacts{};
  std::array<Eigen::Vector3d, 4> foot_force{Eigen::Vector3d::Zero(), Eigen::Vector3d::Zero(),
                                            Eigen::Vector3d::Zero(), Eigen::Vector3d::Zero()};
  Vector12d tau = Vector12d::Zero();
  double time = 0.0;
  Eigen::Vector3d vdot_world{0, 0, 0};  // base origin acceleration, last solve

  Eigen::Vector3d v_world() const { return base_quat.rotate(v); }
  Eigen::Vector3d omega_world() const { return base_quat.rotate(omega); }
};

struct SimDivergence : std::runtime_error {
  explicit SimDivergence(const std::string& field_)
      : std::runtime_error("simulation diverged: " + field_), field(field_) {}
  std::string field;
};

// Steps one robot at the simulation rate: latency-buffered joint command,
// PD torque, penalty contacts, articulated forward dynamics, semi-implicit
// Euler (velocities first, then positions).
class Simulator {
 public:
  Simulator(const robot::RobotModel& model, const ActuatorConfig& actuator,
            const ContactParams& contact, Terrain terrain, double dt = 0.005);

  void reset(const SimState& state);
  const SimState& state() const { return state_; }
  const Terrain& terrain() const { return terrain_; }
  const robot::RobotModel& model() const { return model_; }
  const TreeModel& tree() const { return tree_; }
  double dt() const { return dt_; }

  void set_gravity(double g) { gravity_ = g; }
  void set_actuator(const ActuatorConfig& a) { actuator_ = a; }
  void set_contact_params(const ContactParams& c) { contact_ = c; }
  void set_terrain(Terrain t) { terrain_ = std::move(t); }

  // Control-rate command; becomes effective after delay_steps simulation steps.
  void queue_command(const Vector12d& q_des, int delay_steps);

  void step();                              // PD-tracked step using the queued command
  void step_torque(const Vector12d& tau);   // direct torque step (tests, diagnostics)

  std::array<Eigen::Vector3d, 4> foot_positions() const;
  std::array<Eigen::Vector3d, 4> foot_velocities() const;

  TreeState tree_state() const;
  // kinetic + gravitational + contact-spring energy
  double mechanical_energy() const;

 private:
  Vector12d effective_command();
  Eigen::VectorXd solve_accelerations(const TreeState& ts, const Vector12d& tau);
  template <typename TorqueFn>
  void step_impl(const TorqueFn& torque_of);
  void check_divergence() const;

  robot::RobotModel model_;
  TreeModel tree_;
  ActuatorConfig actuator_;
  ContactParams contact_;
  Terrain terrain_;
  double dt_;
  double gravity_ = 9.81;
  SimState state_;
  long long step_count_ = 0;

  struct PendingCommand {
    long long available_at;
    Vector12d q_des;
  };
  std::deque<PendingCommand> command_queue_;
  Vector12d active_command_ = Vector12d::Zero();
};

}  // namespace qj::phys
