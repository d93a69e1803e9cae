#include "quadjump/domainrand/domain_rand.hpp"

#include <cmath>
#include <stdexcept>

namespace qj::domainrand {

Profile profile_from_string(const std::string& s) {
  if (s == "train") return Profile::Train;
  if (s == "deploy_eval") return Profile::DeployEval;
  if (s == "off") return Profile::Off;
  throw std::runtime_error("domain_rand: unknown profile '" + s + "'");
}

const char* to_string(Profile p) {
  switch (p) {
    case Profile::Train: return "train";
    case Profile::DeployEval: return "deploy_eval";
    case Profile::Off: return "off";
  }
  return "?";
}

RandomizationDraw sample_draw(math::RngStream& rng, const DomainRandConfig& config) {
  RandomizationDraw d;
  switch (config.profile) {
    case Profile::Off:
      return d;
    case Profile::DeployEval:
      // hardware-evaluation constants
      d.joint_friction = 0.04;
      d.joint_damping = 0.01;
      d.episodic_latency_ms = 30.0;
      d.per_step_jitter_bound_ms = 0.0;
      return d;
    case Profile::Train:
      d.ground_friction = config.ground_friction.sample(rng);
      d.ground_restitution = config.ground_restitution.sample(rng);
      d.payload_kg = config.payload_kg.sample(rng);
      d.link_mass_factor = config.link_mass_factor.sample(rng);
      for (int k = 0; k < 3; ++k) d.com_displacement[k] = config.com_displacement_m.sample(rng);
      d.episodic_latency_ms = config.episodic_latency_ms.sample(rng);
      d.per_step_jitter_bound_ms = config.per_step_latency_ms.hi;
      d.motor_strength_factor = config.motor_strength_factor.sample(rng);
      for (int j = 0; j < 12; ++j) d.joint_offsets[j] = config.joint_offset_rad.sample(rng);
      d.pd_gain_factor = config.pd_gain_factor.sample(rng);
      d.joint_friction = config.joint_friction.sample(rng);
      d.joint_damping = config.joint_damping.sample(rng);
      return d;
  }
  return d;
}

EpisodeSetup apply_draw(const robot::RobotModel& model, const phys::ActuatorConfig& actuator,
                        const phys::ContactParams& contact, const RandomizationDraw& draw) {
  EpisodeSetup setup;
  setup.model = model;
  setup.model.base_mass = model.base_mass * draw.link_mass_factor + draw.payload_kg;
  if (setup.model.base_mass <= 0.0)
    throw std::runtime_error("domain_rand: drawn base mass is non-positive");
  setup.model.base_com += draw.com_displacement;
  for (auto& link : setup.model.links) link.mass *= draw.link_mass_factor;

  setup.actuator = actuator;
  setup.actuator.kp *= draw.pd_gain_factor;
  setup.actuator.kd *= draw.pd_gain_factor;
  setup.actuator.motor_strength = draw.motor_strength_factor;
  setup.actuator.joint_friction = draw.joint_friction;
  setup.actuator.joint_damping = draw.joint_damping;

  setup.contact = contact;
  setup.contact.friction = draw.ground_friction;
  setup.contact.restitution = draw.ground_restitution;

  setup.joint_obs_offsets = draw.joint_offsets;
  setup.episodic_latency_ms = draw.episodic_latency_ms;
  setup.per_step_jitter_bound_ms = draw.per_step_jitter_bound_ms;
  return setup;
}

int per_step_latency_steps(math::RngStream& rng, double episodic_base_ms, double jitter_bound_ms,
                           double sim_dt) {
  const double jitter = jitter_bound_ms > 0.0 ? rng.uniform(-jitter_bound_ms, jitter_bound_ms) : 0.0;
  const double delay_ms = std::max(0.0, episodic_base_ms + jitter);
  return static_cast<int>(std::llround(delay_ms / (sim_dt * 1000.0)));
}

}  // namespace qj::domainrand
