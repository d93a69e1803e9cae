#pragma once

#include <string>

#include "quadjump/math/rng.hpp"
#include "quadjump/physics/actuator.hpp"
#include "quadjump/physics/contact.hpp"
#include "quadjump/robot/model.hpp"

namespace qj::domainrand {

enum class Profile { Train, DeployEval, Off };

Profile profile_from_string(const std::string& s);
const char* to_string(Profile p);

struct Range {
  double lo = 0.0, hi = 0.0;
  double sample(math::RngStream& rng) const { return rng.uniform(lo, hi); }
  bool contains(double v) const { return v >= lo && v <= hi; }
};

// Randomised variables and their ranges; defaults follow the published set.
struct DomainRandConfig {
  Profile profile = Profile::Train;
  Range ground_friction{0.01, 3.0};
  Range ground_restitution{0.0, 0.4};
  Range payload_kg{-1.0, 3.0};
  Range link_mass_factor{0.7, 1.3};
  Range com_displacement_m{-0.1, 0.1};   // per axis
  Range episodic_latency_ms{0.0, 40.0};
  Range per_step_latency_ms{-5.0, 5.0};  // jitter added to the episodic value
  Range motor_strength_factor{0.9, 1.1};
  Range joint_offset_rad{-0.02, 0.02};   // per joint
  Range pd_gain_factor{0.9, 1.1};
  Range joint_friction{0.0, 0.04};
  Range joint_damping{0.0, 0.01};
};

struct RandomizationDraw {
  double ground_friction = 1.0;
  double ground_restitution = 0.0;
  double payload_kg = 0.0;
  double link_mass_factor = 1.0;
  Eigen::Vector3d com_displacement{0, 0, 0};
  double episodic_latency_ms = 0.0;
  double per_step_jitter_bound_ms = 0.0;
  double motor_strength_factor = 1.0;
  Vector12d joint_offsets = Vector12d::Zero();
  double pd_gain_factor = 1.0;
  double joint_friction = 0.0;
  double joint_damping = 0.0;
};

// train: uniform draws over every range; deploy_eval: the fixed hardware
// constants (joint friction 0.04, damping 0.01, latency 30 ms), everything
// else nominal; off: nominal values throughout.
RandomizationDraw sample_draw(math::RngStream& rng, const DomainRandConfig& config);

struct EpisodeSetup {
  robot::RobotModel model;
  phys::ActuatorConfig actuator;
  phys::ContactParams contact;
  Vector12d joint_obs_offsets = Vector12d::Zero();  // added to observed q only
  double episodic_latency_ms = 0.0;
  double per_step_jitter_bound_ms = 0.0;
};

// Applies a draw to the nominal episode configuration. Throws
// std::runtime_error if the drawn model is non-physical.
EpisodeSetup apply_draw(const robot::RobotModel& model, const phys::ActuatorConfig& actuator,
                        const phys::ContactParams& contact, const RandomizationDraw& draw);

// Effective command delay for one control step, quantized to whole
// simulation steps: clamp(base + jitter, 0, inf) with jitter ~ U(-b, b).
int per_step_latency_steps(math::RngStream& rng, double episodic_base_ms, double jitter_bound_ms,
                           double sim_dt);

}  // namespace qj::domainrand
