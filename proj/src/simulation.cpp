#include "gridrisk/simulation.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <fstream>
#include <map>
#include <mutex>
#include <thread>

#include "gridrisk/campaign_io.hpp"
#include "gridrisk/case_parser.hpp"

namespace gridrisk {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

OperatorResponse operator_stage(const TrueGrid& grid, const AttackerSolution& attack,
                                const lp::SolveSettings& settings, bool& infeasible) {
  infeasible = false;
  if (attack.status != AttackStatus::Found) return zero_response(grid.grid());
  auto response = react(grid, attack.injections_mw, settings);
  if (response.status == OperatorStatus::Infeasible) {
    // The operator keeps the base point when no redispatch satisfies its view.
    infeasible = true;
    response = zero_response(grid.grid());
    response.status = OperatorStatus::Infeasible;
  }
  return response;
}

FlowState physics_stage(const TrueGrid& grid, const OperatorResponse& response) {
  const GridCase& g = grid.grid();
  return solve_dc_flow(g, response.physical_injections(g), g.reference_bus);
}

AttackerConfig doubled_big_m(AttackerConfig config) {
  config.big_m_dual *= 2.0;
  if (config.big_m_flag) *config.big_m_flag *= 2.0;
  return config;
}

}  // namespace

std::string to_string(Stage stage) {
  switch (stage) {
    case Stage::Perceive: return "perceive";
    case Stage::Attack: return "attack";
    case Stage::React: return "react";
    case Stage::Evaluate: return "evaluate";
  }
  return "unknown";
}

SampleOutcome SampleRecord::outcome() const {
  SampleOutcome o;
  o.launched = attacker_solution.status == AttackStatus::Found;
  o.meter_flags = attacker_solution.meter_flags;
  o.injections_mw = attacker_solution.injections_mw;
  o.impact = true_impact;
  o.category = category;
  o.operator_infeasible = operator_infeasible;
  return o;
}

TrueGrid prepare_true_grid(const std::string& case_path, double capacity_scale, BaseDispatchMode mode,
                           const lp::SolveSettings& settings) {
  GridCase grid = build_grid(parse_case_file(case_path), capacity_scale);
  require_connected(grid);
  return TrueGrid{resolve_base_dispatch(std::move(grid), mode, settings)};
}

AttackEvaluation evaluate_attack(const TrueGrid& grid, const AttackerSolution& attack, double rho,
                                 const lp::SolveSettings& settings) {
  AttackEvaluation ev;
  ev.response = operator_stage(grid, attack, settings, ev.operator_infeasible);
  const auto flows = physics_stage(grid, ev.response);
  ev.impact = measure_impact(grid.grid(), flows, uniform_thresholds(grid.grid(), rho));
  ev.flows_mw = flows.flows_mw;
  return ev;
}

PerfectBaseline compute_baseline(const CampaignSpec& spec) {
  const auto& g = spec.grid.grid();
  const auto attack = solve_attack(perceive_exactly(spec.grid), g.demands(), g.base_dispatch(), spec.attacker,
                                   spec.solver);
  const auto ev = evaluate_attack(spec.grid, attack, spec.attacker.rho, spec.solver);
  return make_baseline(attack, ev.impact, spec.attack_hash());
}

SampleRecord run_sample(const CampaignSpec& spec, const PerfectBaseline& baseline, int sample_index) {
  if (sample_index < 0 || sample_index >= spec.error.sample_count) {
    throw ConfigError("sample index " + std::to_string(sample_index) + " is outside the campaign");
  }
  const GridCase& truth = spec.grid.grid();
  SampleRecord rec;
  rec.sample_index = sample_index;

  auto t = Clock::now();
  PerceivedGrid perceived;
  try {
    auto d = draw(spec.error, sample_index, truth.branch_count());
    perceived = apply(spec.grid, d, spec.error.target);
    rec.multipliers = std::move(d.multipliers);
  } catch (const std::exception& e) {
    throw SampleError(sample_index, Stage::Perceive, e.what());
  }
  rec.timings.perceive_s = seconds_since(t);

  // Demand and base dispatch are the true ones: only branch data is uncertain.
  t = Clock::now();
  const auto demands = truth.demands();
  const auto base = truth.base_dispatch();
  try {
    try {
      rec.attacker_solution = solve_attack(perceived, demands, base, spec.attacker, spec.solver);
    } catch (const AttackError& e) {
      if (e.kind() != AttackError::Kind::NumericFailure) throw;
      rec.retried = true;
      rec.attacker_solution = solve_attack(perceived, demands, base, doubled_big_m(spec.attacker), spec.solver);
    }
  } catch (const std::exception& e) {
    throw SampleError(sample_index, Stage::Attack, e.what());
  }
  rec.timings.attack_s = seconds_since(t);

  t = Clock::now();
  try {
    rec.operator_response = operator_stage(spec.grid, rec.attacker_solution, spec.solver, rec.operator_infeasible);
  } catch (const std::exception& e) {
    throw SampleError(sample_index, Stage::React, e.what());
  }
  rec.timings.react_s = seconds_since(t);

  t = Clock::now();
  try {
    const auto flows = physics_stage(spec.grid, rec.operator_response);
    rec.true_impact = measure_impact(truth, flows, uniform_thresholds(truth, spec.attacker.rho));
    rec.true_flows_mw = flows.flows_mw;
    rec.category = classify(rec.attacker_solution, rec.true_impact, baseline, spec.attacker.min_overloads,
                            spec.attack_hash());
  } catch (const std::exception& e) {
    throw SampleError(sample_index, Stage::Evaluate, e.what());
  }
  rec.timings.evaluate_s = seconds_since(t);
  return rec;
}

PartialCampaign::PartialCampaign(std::vector<int> failed, std::vector<std::string> messages, CampaignResult partial)
    : std::runtime_error(std::to_string(failed.size()) + " sample(s) failed after retry"),
      failed_(std::move(failed)),
      messages_(std::move(messages)),
      partial_(std::move(partial)) {}

namespace {

// Appends finished records in sample order. Records arriving early wait in
// `pending` until every lower index has been written or has failed.
class OrderedSink {
 public:
  OrderedSink(std::vector<int> order, std::ofstream* out, std::ofstream* timings,
              std::function<void(std::size_t, std::size_t)> progress, std::size_t total, std::size_t already)
      : order_(std::move(order)),
        out_(out),
        timings_(timings),
        progress_(std::move(progress)),
        total_(total),
        done_(already) {}

  void commit(std::size_t slot, SampleRecord rec) {
    std::lock_guard lock(mutex_);
    pending_.emplace(slot, std::move(rec));
    drain();
  }

  void fail(std::size_t slot, std::string message) {
    std::lock_guard lock(mutex_);
    failed_.emplace(slot, std::move(message));
    drain();
  }

  std::vector<SampleRecord> take_records() { return std::move(written_); }
  const std::map<std::size_t, std::string>& failures() const { return failed_; }

 private:
  void drain() {
    while (cursor_ < order_.size()) {
      if (auto it = pending_.find(cursor_); it != pending_.end()) {
        write(it->second);
        written_.push_back(std::move(it->second));
        pending_.erase(it);
      } else if (!failed_.contains(cursor_)) {
        break;
      }
      ++cursor_;
      ++done_;
      if (progress_) progress_(done_, total_);
    }
  }

  void write(const SampleRecord& rec) {
    if (out_ != nullptr) *out_ << to_json(rec).dump() << '\n' << std::flush;
    if (timings_ != nullptr) {
      const auto& t = rec.timings;
      *timings_ << rec.sample_index << ',' << t.perceive_s << ',' << t.attack_s << ',' << t.react_s << ','
                << t.evaluate_s << '\n'
                << std::flush;
    }
  }

  std::mutex mutex_;
  std::vector<int> order_;
  std::ofstream* out_;
  std::ofstream* timings_;
  std::function<void(std::size_t, std::size_t)> progress_;
  std::size_t total_;
  std::size_t done_;
  std::size_t cursor_ = 0;
  std::map<std::size_t, SampleRecord> pending_;
  std::map<std::size_t, std::string> failed_;
  std::vector<SampleRecord> written_;
};

// Records of a previous run of the same spec, keyed by sample index.
std::map<int, SampleRecord> load_existing(const std::filesystem::path& path, std::uint64_t hash, int sample_count,
                                          bool overwrite_mismatch) {
  std::map<int, SampleRecord> existing;
  if (!std::filesystem::exists(path)) return existing;
  CampaignFile file;
  try {
    file = read_campaign(path);
  } catch (const CampaignSchemaError&) {
    if (overwrite_mismatch) return existing;
    throw;
  }
  if (file.header.spec_hash != hash) {
    if (overwrite_mismatch) return existing;
    throw CampaignSchemaError(path.string() + " was written for a different configuration (spec hash " +
                              hash_hex(file.header.spec_hash) + ", expected " + hash_hex(hash) + ")");
  }
  for (auto& rec : file.records) {
    if (rec.sample_index >= 0 && rec.sample_index < sample_count) {
      existing.try_emplace(rec.sample_index, std::move(rec));
    }
  }
  return existing;
}

}  // namespace

CampaignResult run_campaign(const CampaignSpec& spec, const PerfectBaseline& baseline,
                            const CampaignOptions& options) {
  spec.error.validate();
  spec.attacker.validate();
  if (options.parallelism < 1) throw ConfigError("parallelism must be at least 1");
  const int n = spec.error.sample_count;

  CampaignResult result;
  result.spec_hash = spec.spec_hash();

  std::map<int, SampleRecord> existing;
  std::optional<CampaignHeader> header;
  std::ofstream out;
  if (options.output) {
    header = make_header(spec, baseline);
    existing = load_existing(*options.output, result.spec_hash, n, options.overwrite_mismatch);
    std::vector<SampleRecord> kept;
    for (auto& [i, rec] : existing) kept.push_back(rec);
    // Rewriting drops torn lines and duplicates before anything is appended.
    write_campaign(*options.output, *header, kept);
    out.open(*options.output, std::ios::app | std::ios::binary);
    if (!out) throw std::runtime_error("cannot append to " + options.output->string());
  }
  std::ofstream timings;
  if (options.timings) {
    const bool fresh = !std::filesystem::exists(*options.timings) || existing.empty();
    timings.open(*options.timings, fresh ? std::ios::trunc : std::ios::app);
    if (!timings) throw std::runtime_error("cannot write " + options.timings->string());
    if (fresh) timings << "sample,perceive_s,attack_s,react_s,evaluate_s\n";
  }

  std::vector<int> todo;
  for (int i = 0; i < n; ++i) {
    if (!existing.contains(i)) todo.push_back(i);
  }
  result.resumed = existing.size();

  OrderedSink sink(todo, options.output ? &out : nullptr, options.timings ? &timings : nullptr, options.progress,
                   static_cast<std::size_t>(n), existing.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t slot = next++; slot < todo.size(); slot = next++) {
      try {
        sink.commit(slot, run_sample(spec, baseline, todo[slot]));
      } catch (const std::exception& e) {
        sink.fail(slot, e.what());
      }
    }
  };
  const auto workers = std::min<std::size_t>(static_cast<std::size_t>(options.parallelism), todo.size());
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
  }

  auto fresh = sink.take_records();
  const bool appended = !fresh.empty();
  for (auto& rec : fresh) existing.insert_or_assign(rec.sample_index, std::move(rec));
  for (auto& [i, rec] : existing) result.records.push_back(std::move(rec));

  // Resumed files get the new records appended after the old ones; restore
  // the canonical order so the file matches an uninterrupted run.
  if (options.output && result.resumed > 0 && appended) {
    out.close();
    write_campaign(*options.output, *header, result.records);
  }

  std::vector<SampleOutcome> outcomes;
  outcomes.reserve(result.records.size());
  for (const auto& rec : result.records) outcomes.push_back(rec.outcome());
  const auto summary = summarize(outcomes, spec.attacker.min_overloads);
  result.unique_attack_vectors = summary.unique_attack_vectors;
  result.mean_impact_mw = summary.mean_impact_mw;

  if (!sink.failures().empty()) {
    std::vector<int> failed;
    std::vector<std::string> messages;
    for (const auto& [slot, message] : sink.failures()) {
      failed.push_back(todo[slot]);
      messages.push_back(message);
    }
    throw PartialCampaign(std::move(failed), std::move(messages), std::move(result));
  }
  return result;
}

}  // namespace gridrisk
