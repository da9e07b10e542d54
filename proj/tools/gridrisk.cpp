// Command-line front end: perfect-attack, campaign and report.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "gridrisk/campaign_io.hpp"
#include "gridrisk/case_parser.hpp"
#include "gridrisk/config.hpp"
#include "gridrisk/reports.hpp"
#include "gridrisk/simulation.hpp"

namespace fs = std::filesystem;
using namespace gridrisk;

namespace {

enum ExitCode : int {
  kOk = 0,
  kOtherError = 1,
  kConfigError = 2,
  kSolverFailure = 3,
  kNoFeasibleAttack = 4,
  kPartialCampaign = 5,
  kSchemaMismatch = 6,
};

struct Overrides {
  std::string config_file;
  std::optional<std::string> case_path;
  std::optional<double> capacity_scale;
  std::optional<int> u, budget;
  std::optional<double> epsilon, rho;
  std::optional<std::string> error_target;
  std::optional<double> half_range;
  std::optional<int> samples;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> base_dispatch;
  std::optional<std::string> out;
  std::optional<int> jobs;
  std::optional<double> time_limit;
};

void add_run_flags(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--config", o.config_file, "JSON run configuration");
  cmd->add_option("--case", o.case_path, "MATPOWER case file");
  cmd->add_option("--capacity-scale", o.capacity_scale, "factor applied to every branch rating");
  cmd->add_option("--u", o.u, "branches the attacker wants overloaded");
  cmd->add_option("--budget", o.budget, "number of load meters the attacker may alter");
  cmd->add_option("--epsilon", o.epsilon, "largest relative change per meter");
  cmd->add_option("--rho", o.rho, "overload threshold as a ratio of capacity");
  cmd->add_option("--error", o.error_target, "parameter the attacker gets wrong")
      ->check(CLI::IsMember({"admittance", "capacity"}));
  cmd->add_option("--half-range", o.half_range, "error multipliers are drawn from [1 - h, 1 + h]");
  cmd->add_option("--samples", o.samples, "number of Monte Carlo samples");
  cmd->add_option("--seed", o.seed, "master seed of the error draws");
  cmd->add_option("--base-dispatch", o.base_dispatch, "how generator set points are resolved")
      ->check(CLI::IsMember({"opf", "case-pg"}));
  cmd->add_option("--out", o.out, "output directory");
  cmd->add_option("--jobs", o.jobs, "worker threads");
  cmd->add_option("--time-limit", o.time_limit, "time limit per solve, seconds");
}

RunConfig resolve(const Overrides& o) {
  RunConfig c;
  if (!o.config_file.empty()) c = load_config_file(o.config_file, c);
  if (o.case_path) c.case_path = *o.case_path;
  if (o.capacity_scale) c.capacity_scale = *o.capacity_scale;
  if (o.u) c.attacker.min_overloads = *o.u;
  if (o.budget) c.attacker.budget = *o.budget;
  if (o.epsilon) c.attacker.epsilon = *o.epsilon;
  if (o.rho) c.attacker.rho = *o.rho;
  if (o.error_target) c.error.target = parse_error_target(*o.error_target);
  if (o.half_range) c.error.half_range = *o.half_range;
  if (o.samples) c.error.sample_count = *o.samples;
  if (o.seed) c.error.master_seed = *o.seed;
  if (o.base_dispatch) c.base_dispatch_mode = parse_base_dispatch_mode(*o.base_dispatch);
  if (o.out) c.output_dir = *o.out;
  if (o.jobs) c.parallelism = *o.jobs;
  if (o.time_limit) c.solver.time_limit_s = *o.time_limit;
  c.validate();
  return c;
}

void write_text(const fs::path& path, const std::string& text) { write_file_atomic(path, text); }

void prepare_output(const RunConfig& config) {
  fs::create_directories(config.output_dir);
  write_text(fs::path(config.output_dir) / "resolved_config.json", to_json(config).dump(2) + "\n");
}

void print_baseline(const GridCase& grid, const PerfectBaseline& b) {
  std::printf("attack vector (%zu meters):\n", b.attacked_meters.size());
  std::printf("  %6s %10s %10s %9s\n", "bus", "load MW", "change MW", "change %");
  for (const auto n : b.attacked_meters) {
    const double d = grid.buses[n].demand_mw;
    const double e = b.injections_mw[n];
    std::printf("  %6d %10.2f %+10.2f %+8.1f%%\n", grid.buses[n].external_id, d, e, d != 0.0 ? 100.0 * e / d : 0.0);
  }
  std::printf("true impact: %zu overloaded branch(es)\n", b.impact.count_above_threshold);
  for (const auto& o : b.impact.overloaded) {
    std::printf("  branch %2zu  %6.1f%%  excess %.2f MW\n", o.branch + 1, 100.0 * o.loading_ratio, o.excess_mw);
  }
  for (const auto& o : b.impact.sub_threshold_overloads) {
    std::printf("  branch %2zu  %6.1f%%  (below threshold)\n", o.branch + 1, 100.0 * o.loading_ratio);
  }
  std::printf("total overload %.2f MW, beyond threshold %.2f MW\n", b.impact.total_impact,
              b.impact.measurable_impact);
}

void write_baseline(const RunConfig& config, const PerfectBaseline& b) {
  write_text(fs::path(config.output_dir) / "baseline.json", to_json(b).dump(2) + "\n");
}

int cmd_perfect_attack(const Overrides& o) {
  const auto config = resolve(o);
  prepare_output(config);
  const auto spec = make_campaign_spec(config);
  const auto baseline = compute_baseline(spec);
  write_baseline(config, baseline);
  if (!baseline.found) {
    std::fprintf(stderr, "no feasible attack\n");
    return kNoFeasibleAttack;
  }
  print_baseline(spec.grid.grid(), baseline);
  return kOk;
}

int emit_reports(const fs::path& campaign_path, const fs::path& dir) {
  const auto file = read_campaign(campaign_path);
  if (file.records.empty()) throw CampaignSchemaError(campaign_path.string() + " holds no records");
  if (file.invalid_lines > 0) {
    std::fprintf(stderr, "warning: skipped %zu unreadable line(s) in %s\n", file.invalid_lines,
                 campaign_path.string().c_str());
  }
  const auto reports = build_reports(file);
  write_reports(dir, reports, file.header.bus_ids);
  print_summary(std::cout, reports.summary);
  return kOk;
}

int cmd_campaign(const Overrides& o, bool fresh) {
  const auto config = resolve(o);
  prepare_output(config);
  const auto spec = make_campaign_spec(config);
  const auto baseline = compute_baseline(spec);
  write_baseline(config, baseline);
  if (!baseline.found) {
    std::fprintf(stderr, "no feasible attack\n");
    return kNoFeasibleAttack;
  }

  const fs::path dir = config.output_dir;
  CampaignOptions options;
  options.parallelism = config.parallelism;
  options.output = dir / "campaign.jsonl";
  options.timings = dir / "timings.csv";
  options.overwrite_mismatch = fresh;
  if (fresh) fs::remove(*options.output);
  options.progress = [](std::size_t done, std::size_t total) {
    if (done % 25 == 0 || done == total) std::fprintf(stderr, "\r%zu/%zu samples", done, total);
    if (done == total) std::fprintf(stderr, "\n");
  };

  int status = kOk;
  try {
    const auto result = run_campaign(spec, baseline, options);
    if (result.resumed > 0) std::fprintf(stderr, "resumed %zu existing record(s)\n", result.resumed);
  } catch (const PartialCampaign& e) {
    std::fprintf(stderr, "%s\n", e.what());
    for (std::size_t k = 0; k < e.failed_indices().size(); ++k) {
      std::fprintf(stderr, "  %s\n", e.messages()[k].c_str());
    }
    status = kPartialCampaign;
  }
  // Reports always come from the persisted file, so `report` reproduces them.
  emit_reports(*options.output, dir);
  return status;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Load redistribution attacks under imperfect grid information"};
  app.require_subcommand(1);

  Overrides perfect_flags, campaign_flags;
  auto* perfect = app.add_subcommand("perfect-attack", "solve the attack on exact grid data");
  add_run_flags(perfect, perfect_flags);

  bool fresh = false;
  auto* campaign = app.add_subcommand("campaign", "Monte Carlo campaign over perturbed grid data");
  add_run_flags(campaign, campaign_flags);
  campaign->add_flag("--fresh", fresh, "discard an existing campaign.jsonl instead of resuming it");

  std::string report_path;
  std::optional<std::string> report_out;
  auto* report = app.add_subcommand("report", "rebuild the CSV reports of a campaign file");
  report->add_option("campaign", report_path, "campaign.jsonl")->required();
  report->add_option("--out", report_out, "directory for the CSVs (default: next to the campaign file)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }

  try {
    if (*perfect) return cmd_perfect_attack(perfect_flags);
    if (*campaign) return cmd_campaign(campaign_flags, fresh);
    const fs::path path = report_path;
    return emit_reports(path, report_out ? fs::path(*report_out) : path.parent_path());
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "configuration error: %s\n", e.what());
    return kConfigError;
  } catch (const CaseError& e) {
    std::fprintf(stderr, "case error: %s\n", e.what());
    return kConfigError;
  } catch (const CampaignSchemaError& e) {
    std::fprintf(stderr, "campaign file error: %s\n", e.what());
    return kSchemaMismatch;
  } catch (const AttackError& e) {
    std::fprintf(stderr, "solver failure: %s\n", e.what());
    return kSolverFailure;
  } catch (const lp::SolverError& e) {
    std::fprintf(stderr, "solver failure: %s\n", e.what());
    return kSolverFailure;
  } catch (const OperatorError& e) {
    std::fprintf(stderr, "solver failure: %s\n", e.what());
    return kSolverFailure;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kOtherError;
  }
}
