#pragma once

#include <filesystem>
#include <string>

#include "json.hpp"

#include "gridrisk/attacker.hpp"
#include "gridrisk/operator_dcopf.hpp"
#include "gridrisk/perturbation.hpp"
#include "gridrisk/simulation.hpp"
#include "gridrisk/solver.hpp"

namespace gridrisk {

/// Every setting of a run. JSON keys match the field names; nested groups
/// are `attacker`, `error` and `solver`.
struct RunConfig {
  std::string case_path = "data/case24_ieee_rts.m";
  double capacity_scale = 0.65;
  AttackerConfig attacker;
  ErrorSpec error;
  BaseDispatchMode base_dispatch_mode = BaseDispatchMode::Opf;
  lp::SolveSettings solver;
  std::string output_dir = "out";
  int parallelism = 1;

  /// Throws ConfigError.
  void validate() const;
};

nlohmann::json to_json(const RunConfig& config);

/// Applies the keys present in `j` on top of `base`. Unknown keys and values
/// of the wrong type are ConfigErrors.
RunConfig merge_config(RunConfig base, const nlohmann::json& j);

RunConfig load_config_file(const std::filesystem::path& path, RunConfig base = {});

/// Parses the case and resolves the base dispatch.
CampaignSpec make_campaign_spec(const RunConfig& config);

}  // namespace gridrisk
