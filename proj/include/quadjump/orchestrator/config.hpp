#pragma once

#include <string>
#include <vector>

#include "quadjump/curriculum/curriculum.hpp"
#include "quadjump/domainrand/domain_rand.hpp"
#include "quadjump/env/jump_env.hpp"
#include "quadjump/ppo/ppo.hpp"

namespace qj::orch {

// The whole run in one document. Unknown keys anywhere are rejected.
struct RunConfig {
  // run block
  int n_envs = 256;
  int horizon = 24;
  uint64_t seed = 1;
  int workers = 2;
  std::string out_dir = "runs/default";
  int checkpoint_every = 100;
  curriculum::Stage stage = curriculum::Stage::I;
  int iterations = -1;  // negative = the stage's default budget
  std::string env_type = "jump";  // or "hopper"

  std::string model_file;  // resolved relative to the config document

  env::EnvConfig env;
  phys::ContactParams physics;
  phys::ActuatorConfig actuator;
  rewards::RewardWeights reward;
  curriculum::CurriculumConfig curriculum;
  domainrand::DomainRandConfig domain_rand;
  ppo::PpoHyper ppo;
  std::vector<int> hidden = {256, 128, 64};
  double reward_scale = 0.05;  // buffer-side scaling; metrics stay raw

  int effective_iterations() const;
};

RunConfig load_config(const std::string& path);
RunConfig parse_config(const std::string& text, const std::string& base_dir);

// Canonical serialization of the semantic blocks (everything except the
// operational run block) and its FNV-1a hash; detects mismatched resumes.
std::string canonical_semantic_config(const RunConfig& cfg);
uint64_t config_hash(const RunConfig& cfg);

}  // namespace qj::orch
