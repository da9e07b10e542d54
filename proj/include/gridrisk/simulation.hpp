#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "gridrisk/analytics.hpp"
#include "gridrisk/attacker.hpp"
#include "gridrisk/grid.hpp"
#include "gridrisk/grid_core.hpp"
#include "gridrisk/operator_dcopf.hpp"
#include "gridrisk/perturbation.hpp"
#include "gridrisk/solver.hpp"

namespace gridrisk {

/// Everything a campaign depends on. `grid` must already carry its base dispatch.
struct CampaignSpec {
  TrueGrid grid;
  std::string grid_label;  // where the grid came from, for the header only
  AttackerConfig attacker;
  ErrorSpec error;
  lp::SolveSettings solver;

  /// Hash of the grid data and attacker settings: identifies a baseline.
  [[nodiscard]] std::uint64_t attack_hash() const;
  /// Hash of everything above except the label: identifies a campaign file.
  [[nodiscard]] std::uint64_t spec_hash() const;
};

/// Parse, scale and dispatch a case file into the grid every stage shares.
TrueGrid prepare_true_grid(const std::string& case_path, double capacity_scale, BaseDispatchMode mode,
                           const lp::SolveSettings& settings = {});

struct StageTimings {
  double perceive_s = 0.0;
  double attack_s = 0.0;
  double react_s = 0.0;
  double evaluate_s = 0.0;
};

struct SampleRecord {
  int sample_index = 0;
  std::vector<double> multipliers;
  AttackerSolution attacker_solution;
  OperatorResponse operator_response;  // on the true grid
  std::vector<double> true_flows_mw;
  ImpactReport true_impact;
  Category category = Category::NoAttempt;
  bool operator_infeasible = false;
  bool retried = false;  // solved a second time with doubled big-M values
  StageTimings timings;  // not persisted with the record

  [[nodiscard]] SampleOutcome outcome() const;
};

enum class Stage { Perceive, Attack, React, Evaluate };

std::string to_string(Stage stage);

class SampleError : public std::runtime_error {
 public:
  SampleError(int sample_index, Stage stage, const std::string& what)
      : std::runtime_error("sample " + std::to_string(sample_index) + ", " + to_string(stage) + ": " + what),
        sample_index_(sample_index),
        stage_(stage) {}

  [[nodiscard]] int sample_index() const { return sample_index_; }
  [[nodiscard]] Stage stage() const { return stage_; }

 private:
  int sample_index_;
  Stage stage_;
};

/// True-grid consequences of an attack: the operator's reaction and the
/// physical flows it produces. A NoFeasibleAttack solution yields the base state.
struct AttackEvaluation {
  OperatorResponse response;
  std::vector<double> flows_mw;
  ImpactReport impact;
  bool operator_infeasible = false;
};

AttackEvaluation evaluate_attack(const TrueGrid& grid, const AttackerSolution& attack, double rho,
                                 const lp::SolveSettings& settings = {});

/// The zero-error attack on the true grid.
PerfectBaseline compute_baseline(const CampaignSpec& spec);

/// One pass through perceive, attack, react and evaluate. A NumericFailure in
/// the attack stage is retried once with doubled big-M values.
/// Throws SampleError.
SampleRecord run_sample(const CampaignSpec& spec, const PerfectBaseline& baseline, int sample_index);

struct CampaignOptions {
  int parallelism = 1;
  /// Records are appended here as they complete; a matching file is resumed.
  std::optional<std::filesystem::path> output;
  /// Per-sample stage timings, one CSV row per record computed in this run.
  std::optional<std::filesystem::path> timings;
  /// Replace an existing output written for a different spec instead of failing.
  bool overwrite_mismatch = false;
  std::function<void(std::size_t done, std::size_t total)> progress;
};

struct CampaignResult {
  std::uint64_t spec_hash = 0;
  std::vector<SampleRecord> records;  // ascending sample_index
  std::size_t unique_attack_vectors = 0;
  double mean_impact_mw = 0.0;
  std::size_t resumed = 0;  // records taken from an existing output
};

class PartialCampaign : public std::runtime_error {
 public:
  PartialCampaign(std::vector<int> failed, std::vector<std::string> messages, CampaignResult partial);

  [[nodiscard]] const std::vector<int>& failed_indices() const { return failed_; }
  [[nodiscard]] const std::vector<std::string>& messages() const { return messages_; }
  [[nodiscard]] const CampaignResult& partial() const { return partial_; }

 private:
  std::vector<int> failed_;
  std::vector<std::string> messages_;
  CampaignResult partial_;
};

/// Runs every sample of `spec.error`. Records come back and are persisted in
/// sample order whatever the worker count.
CampaignResult run_campaign(const CampaignSpec& spec, const PerfectBaseline& baseline,
                            const CampaignOptions& options = {});

}  // namespace gridrisk
