#include "quadjump/orchestrator/checkpoint.hpp"

#include <json.hpp>

#include <cstring>
#include <filesystem>
#include <fstream>

namespace qj::orch {

using nlohmann::json;

namespace {

constexpr char kMagic[8] = {'Q', 'J', 'C', 'K', '0', '0', '0', '1'};

[[noreturn]] void fail(const std::string& msg) {
  throw std::runtime_error("checkpoint: " + msg);
}

void write_array(std::ofstream& out, const ppo::VectorXf& v) {
  out.write(reinterpret_cast<const char*>(v.data()),
            static_cast<std::streamsize>(v.size() * sizeof(float)));
}

ppo::VectorXf read_array(std::ifstream& in, int64_t count) {
  ppo::VectorXf v(count);
  in.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(count * sizeof(float)));
  if (!in) fail("truncated file while reading arrays");
  return v;
}

}  // namespace

void save_checkpoint(const std::string& path, const Checkpoint& ck) {
  json manifest;
  manifest["schema_version"] = ck.schema_version;
  manifest["stage"] = curriculum::to_string(ck.stage);
  manifest["iteration"] = ck.iteration;
  manifest["config_hash"] = ck.config_hash;
  manifest["env_type"] = ck.env_type;
  manifest["obs_dim"] = ck.obs_dim;
  manifest["act_dim"] = ck.act_dim;
  manifest["hidden"] = ck.hidden;
  manifest["adam_t"] = ck.adam_t;
  manifest["rng"] = {{"policy", ck.policy_rng_counter},
                     {"shuffle", ck.shuffle_rng_counter},
                     {"envs", ck.env_rng_counters}};
  manifest["curriculum"] = {{"levels", ck.curriculum_levels}, {"streaks", ck.curriculum_streaks}};
  manifest["config_json"] = ck.config_json;
  manifest["model_json"] = ck.model_json;
  manifest["arrays"] = {{{"name", "params"}, {"count", ck.params.size()}},
                        {{"name", "adam_m"}, {"count", ck.adam_m.size()}},
                        {{"name", "adam_v"}, {"count", ck.adam_v.size()}}};
  const std::string text = manifest.dump();

  std::filesystem::create_directories(std::filesystem::path(path).parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) fail("cannot write '" + path + "'");
  out.write(kMagic, sizeof(kMagic));
  const uint64_t len = text.size();
  out.write(reinterpret_cast<const char*>(&len), sizeof(len));
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  write_array(out, ck.params);
  write_array(out, ck.adam_m);
  write_array(out, ck.adam_v);
  if (!out) fail("write failed for '" + path + "'");
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail("cannot open '" + path + "'");
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
    fail("'" + path + "' is not a checkpoint (bad magic)");
  uint64_t len = 0;
  in.read(reinterpret_cast<char*>(&len), sizeof(len));
  if (!in || len > (1ull << 30)) fail("corrupt manifest length");
  std::string text(len, '\0');
  in.read(text.data(), static_cast<std::streamsize>(len));
  if (!in) fail("truncated manifest");

  json manifest;
  try {
    manifest = json::parse(text);
  } catch (const json::exception& e) {
    fail(std::string("corrupt manifest: ") + e.what());
  }
  Checkpoint ck;
  ck.schema_version = manifest.at("schema_version").get<int>();
  if (ck.schema_version != 1) fail("unsupported schema version");
  ck.stage = curriculum::stage_from_string(manifest.at("stage").get<std::string>());
  ck.iteration = manifest.at("iteration").get<int>();
  ck.config_hash = manifest.at("config_hash").get<uint64_t>();
  ck.env_type = manifest.at("env_type").get<std::string>();
  ck.obs_dim = manifest.at("obs_dim").get<int>();
  ck.act_dim = manifest.at("act_dim").get<int>();
  ck.hidden = manifest.at("hidden").get<std::vector<int>>();
  ck.adam_t = manifest.at("adam_t").get<int64_t>();
  ck.policy_rng_counter = manifest.at("rng").at("policy").get<uint64_t>();
  ck.shuffle_rng_counter = manifest.at("rng").at("shuffle").get<uint64_t>();
  ck.env_rng_counters = manifest.at("rng").at("envs").get<std::vector<uint64_t>>();
  ck.curriculum_levels = manifest.at("curriculum").at("levels").get<std::vector<int>>();
  ck.curriculum_streaks = manifest.at("curriculum").at("streaks").get<std::vector<int>>();
  ck.config_json = manifest.value("config_json", "");
  ck.model_json = manifest.value("model_json", "");

  for (const auto& arr : manifest.at("arrays")) {
    const std::string name = arr.at("name").get<std::string>();
    const int64_t count = arr.at("count").get<int64_t>();
    if (name == "params")
      ck.params = read_array(in, count);
    else if (name == "adam_m")
      ck.adam_m = read_array(in, count);
    else if (name == "adam_v")
      ck.adam_v = read_array(in, count);
    else
      fail("unknown array '" + name + "'");
  }
  return ck;
}

RunConfig config_from_checkpoint(const Checkpoint& ck) {
  if (ck.config_json.empty()) fail("checkpoint has no embedded configuration");
  json semantic = json::parse(ck.config_json);
  json wrapped;
  wrapped["run"] = {{"env_type", semantic.at("env_type").get<std::string>()},
                    {"stage", curriculum::to_string(ck.stage)}};
  for (const char* key : {"env", "physics", "actuator", "reward", "curriculum", "domain_rand"})
    if (semantic.contains(key)) wrapped[key] = semantic.at(key);
  if (semantic.contains("ppo")) {
    json p = semantic.at("ppo");
    json ppo_block;
    for (auto& [k, v] : p.items()) {
      if (k == "hidden" || k == "reward_scale") ppo_block[k] = v;
      else ppo_block[k] = v;
    }
    wrapped["ppo"] = ppo_block;
  }
  return parse_config(wrapped.dump(), ".");
}

void export_params(const std::string& dir, const Checkpoint& ck) {
  std::filesystem::create_directories(dir);
  json manifest;
  manifest["schema_version"] = ck.schema_version;
  manifest["stage"] = curriculum::to_string(ck.stage);
  manifest["iteration"] = ck.iteration;
  manifest["obs_dim"] = ck.obs_dim;
  manifest["act_dim"] = ck.act_dim;
  manifest["hidden"] = ck.hidden;
  manifest["dtype"] = "float32_le";
  manifest["layout"] =
      "trunk W/b per layer (column-major W, out x in), action head W/b, value head W/b, log_std";
  manifest["param_count"] = ck.params.size();
  std::ofstream mf(std::filesystem::path(dir) / "manifest.json");
  mf << manifest.dump(2) << "\n";
  std::ofstream bin(std::filesystem::path(dir) / "params.bin", std::ios::binary);
  bin.write(reinterpret_cast<const char*>(ck.params.data()),
            static_cast<std::streamsize>(ck.params.size() * sizeof(float)));
  if (!bin) fail("export failed");
}

}  // namespace qj::orch
