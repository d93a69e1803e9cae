#pragma once

#include <string>
#include <vector>

#include "quadjump/curriculum/curriculum.hpp"
#include "quadjump/orchestrator/config.hpp"
#include "quadjump/ppo/ppo.hpp"

namespace qj::orch {

// Single-file format: 8-byte magic, u64 manifest length, manifest JSON,
// then the listed little-endian float32 arrays back to back. Round-trips
// parameters bit-exactly.
struct Checkpoint {
  int schema_version = 1;
  curriculum::Stage stage = curriculum::Stage::I;
  int iteration = 0;
  uint64_t config_hash = 0;
  std::string env_type = "jump";
  int obs_dim = 0;
  int act_dim = 0;
  std::vector<int> hidden;

  ppo::VectorXf params;
  ppo::VectorXf adam_m, adam_v;
  int64_t adam_t = 0;

  uint64_t policy_rng_counter = 0;
  uint64_t shuffle_rng_counter = 0;
  std::vector<uint64_t> env_rng_counters;
  std::vector<int> curriculum_levels;
  std::vector<int> curriculum_streaks;

  // embedded run context so eval/play need no separate documents
  std::string config_json;  // canonical semantic config
  std::string model_json;   // model description document

  curriculum::PolicyShape shape() const { return {obs_dim, act_dim, hidden}; }
};

void save_checkpoint(const std::string& path, const Checkpoint& ck);

// Throws std::runtime_error on a truncated file, bad magic, or an
// unsupported schema version.
Checkpoint load_checkpoint(const std::string& path);

// Flat parameter arrays plus a manifest, for downstream consumers.
void export_params(const std::string& dir, const Checkpoint& ck);

// Rebuilds the semantic run configuration embedded in a checkpoint.
RunConfig config_from_checkpoint(const Checkpoint& ck);

}  // namespace qj::orch
