#include "gridrisk/config.hpp"

#include <fstream>
#include <set>

#include "gridrisk/campaign_io.hpp"

namespace gridrisk {

using nlohmann::json;

void RunConfig::validate() const {
  if (case_path.empty()) throw ConfigError("case_path is empty");
  if (!(capacity_scale > 0.0)) throw ConfigError("capacity_scale must be positive");
  attacker.validate();
  error.validate();
  if (!(solver.time_limit_s > 0.0)) throw ConfigError("solver.time_limit must be positive");
  if (!(solver.mip_rel_gap >= 0.0)) throw ConfigError("solver.mip_gap must be non-negative");
  if (output_dir.empty()) throw ConfigError("output_dir is empty");
  if (parallelism < 1) throw ConfigError("parallelism must be at least 1");
}

json to_json(const RunConfig& c) {
  return {{"case_path", c.case_path},
          {"capacity_scale", c.capacity_scale},
          {"attacker", {{"U", c.attacker.min_overloads}, {"A", c.attacker.budget}, {"epsilon", c.attacker.epsilon},
                        {"rho", c.attacker.rho}}},
          {"error", to_json(c.error)},
          {"base_dispatch_mode", to_string(c.base_dispatch_mode)},
          {"solver", to_json(c.solver)},
          {"output_dir", c.output_dir},
          {"parallelism", c.parallelism}};
}

namespace {

void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + " must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (!allowed.contains(key)) throw ConfigError("unknown key '" + where + key + "'");
  }
}

template <typename T>
void read(const json& j, const char* key, T& target, const std::string& where) {
  if (!j.contains(key)) return;
  try {
    target = j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError("key '" + where + key + "' has the wrong type");
  }
}

}  // namespace

RunConfig merge_config(RunConfig c, const json& j) {
  check_keys(j, {"case_path", "capacity_scale", "attacker", "error", "base_dispatch_mode", "solver", "output_dir",
                 "parallelism"},
             "");
  read(j, "case_path", c.case_path, "");
  read(j, "capacity_scale", c.capacity_scale, "");
  read(j, "output_dir", c.output_dir, "");
  read(j, "parallelism", c.parallelism, "");
  if (j.contains("base_dispatch_mode")) {
    std::string mode;
    read(j, "base_dispatch_mode", mode, "");
    try {
      c.base_dispatch_mode = parse_base_dispatch_mode(mode);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
  }
  if (j.contains("attacker")) {
    const auto& a = j.at("attacker");
    check_keys(a, {"U", "A", "epsilon", "rho"}, "attacker.");
    read(a, "U", c.attacker.min_overloads, "attacker.");
    read(a, "A", c.attacker.budget, "attacker.");
    read(a, "epsilon", c.attacker.epsilon, "attacker.");
    read(a, "rho", c.attacker.rho, "attacker.");
  }
  if (j.contains("error")) {
    const auto& e = j.at("error");
    check_keys(e, {"target", "half_range", "samples", "master_seed"}, "error.");
    if (e.contains("target")) {
      std::string target;
      read(e, "target", target, "error.");
      c.error.target = parse_error_target(target);
    }
    read(e, "half_range", c.error.half_range, "error.");
    read(e, "samples", c.error.sample_count, "error.");
    read(e, "master_seed", c.error.master_seed, "error.");
  }
  if (j.contains("solver")) {
    const auto& s = j.at("solver");
    check_keys(s, {"time_limit", "mip_gap", "deterministic", "seed"}, "solver.");
    read(s, "time_limit", c.solver.time_limit_s, "solver.");
    read(s, "mip_gap", c.solver.mip_rel_gap, "solver.");
    read(s, "deterministic", c.solver.deterministic, "solver.");
    read(s, "seed", c.solver.seed, "solver.");
  }
  return c;
}

RunConfig load_config_file(const std::filesystem::path& path, RunConfig base) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError("config file " + path.string() + " is not valid JSON: " + e.what());
  }
  return merge_config(std::move(base), j);
}

CampaignSpec make_campaign_spec(const RunConfig& config) {
  config.validate();
  CampaignSpec spec;
  spec.grid = prepare_true_grid(config.case_path, config.capacity_scale, config.base_dispatch_mode, config.solver);
  spec.grid_label = std::filesystem::path(config.case_path).filename().string() + " @ capacity x" +
                    json(config.capacity_scale).dump() + ", base dispatch " + to_string(config.base_dispatch_mode);
  spec.attacker = config.attacker;
  spec.error = config.error;
  spec.solver = config.solver;
  return spec;
}

}  // namespace gridrisk
