#include "gridrisk/analytics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

namespace gridrisk {

std::string to_string(Category category) {
  switch (category) {
    case Category::Perfect: return "Perfect";
    case Category::Success: return "Success";
    case Category::PartialSuccess: return "PartialSuccess";
    case Category::Failure: return "Failure";
    case Category::NoAttempt: return "NoAttempt";
  }
  return "NoAttempt";
}

Category parse_category(const std::string& text) {
  for (const auto c : kAllCategories) {
    if (to_string(c) == text) return c;
  }
  throw std::invalid_argument("unknown category '" + text + "'");
}

namespace {

std::vector<std::size_t> overloaded_set(const ImpactReport& impact) {
  std::vector<std::size_t> set;
  for (const auto& o : impact.overloaded) set.push_back(o.branch);
  std::sort(set.begin(), set.end());
  set.erase(std::unique(set.begin(), set.end()), set.end());
  return set;
}

std::size_t shared_meters(const std::vector<int>& flags, const PerfectBaseline& baseline) {
  std::size_t k = 0;
  for (const auto n : baseline.attacked_meters) {
    if (n < flags.size() && flags[n] != 0) ++k;
  }
  return k;
}

long long rounded_mw(double e) { return std::llround(e / kVectorTolerance); }

}  // namespace

PerfectBaseline make_baseline(const AttackerSolution& attack, const ImpactReport& impact, std::uint64_t config_hash) {
  PerfectBaseline b;
  b.found = attack.status == AttackStatus::Found;
  b.config_hash = config_hash;
  b.impact = impact;
  b.overloaded_branches = overloaded_set(impact);
  if (b.found) {
    b.meter_flags = attack.meter_flags;
    b.injections_mw = attack.injections_mw;
    for (std::size_t n = 0; n < attack.meter_flags.size(); ++n) {
      if (attack.meter_flags[n] != 0) b.attacked_meters.push_back(n);
    }
  }
  return b;
}

bool same_attack_vector(std::span<const int> a1, std::span<const double> e1, std::span<const int> a2,
                        std::span<const double> e2) {
  if (a1.size() != a2.size() || e1.size() != e2.size()) return false;
  if (!std::equal(a1.begin(), a1.end(), a2.begin())) return false;
  for (std::size_t n = 0; n < e1.size(); ++n) {
    if (std::abs(e1[n] - e2[n]) > kVectorTolerance) return false;
  }
  return true;
}

Category classify(const AttackerSolution& attack, const ImpactReport& impact, const PerfectBaseline& baseline,
                  int min_overloads, std::uint64_t config_hash) {
  if (baseline.config_hash != config_hash) {
    throw BaselineMismatch("perfect-information baseline was computed under a different configuration");
  }
  if (attack.status == AttackStatus::NoFeasibleAttack) return Category::NoAttempt;
  if (baseline.found && same_attack_vector(attack.meter_flags, attack.injections_mw, baseline.meter_flags,
                                           baseline.injections_mw)) {
    return Category::Perfect;
  }
  const auto hits = static_cast<int>(impact.count_above_threshold);
  if (hits >= min_overloads) return Category::Success;
  if (hits >= 1) return Category::PartialSuccess;
  return Category::Failure;
}

RiskSummary summarize(std::span<const SampleOutcome> samples, int min_overloads, double bin_width_mw) {
  RiskSummary s;
  s.samples = samples.size();
  s.histogram.bin_width_mw = bin_width_mw;
  if (samples.empty()) return s;

  std::set<std::pair<std::vector<int>, std::vector<long long>>> vectors;
  std::set<std::vector<int>> meter_sets;
  double impact_sum = 0.0;
  double measurable_sum = 0.0;
  std::size_t one = 0;
  std::size_t u = 0;
  for (const auto& r : samples) {
    ++s.counts[static_cast<std::size_t>(r.category)];
    const auto hits = r.impact.count_above_threshold;
    if (hits >= 1) ++one;
    if (static_cast<int>(hits) >= min_overloads) ++u;
    impact_sum += r.impact.total_impact;
    measurable_sum += r.impact.measurable_impact;

    const auto bin = static_cast<std::size_t>(std::floor(std::max(0.0, r.impact.total_impact) / bin_width_mw));
    if (s.histogram.counts.size() <= bin) s.histogram.counts.resize(bin + 1, 0);
    ++s.histogram.counts[bin];

    if (r.launched) {
      std::vector<long long> e;
      for (const double v : r.injections_mw) e.push_back(rounded_mw(v));
      vectors.emplace(r.meter_flags, std::move(e));
      meter_sets.insert(r.meter_flags);
    }
  }
  const auto n = static_cast<double>(samples.size());
  for (std::size_t k = 0; k < s.counts.size(); ++k) s.shares[k] = static_cast<double>(s.counts[k]) / n;
  s.share_at_least_one = static_cast<double>(one) / n;
  s.share_at_least_u = static_cast<double>(u) / n;
  s.mean_impact_mw = impact_sum / n;
  s.mean_measurable_impact_mw = measurable_sum / n;
  s.unique_attack_vectors = vectors.size();
  s.unique_meter_sets = meter_sets.size();
  return s;
}

ManagementReport management_report(std::span<const SampleOutcome> samples, const PerfectBaseline& baseline) {
  ManagementReport m;
  const std::size_t k_max = baseline.attacked_meters.size();
  m.overlap_counts.assign(k_max + 1, 0.0);

  std::map<std::size_t, std::size_t> meter_hits;
  std::map<std::vector<std::size_t>, std::size_t> groups;
  std::vector<std::size_t> at_least(k_max + 1, 0);
  for (const auto& r : samples) {
    ++groups[overloaded_set(r.impact)];
    if (!r.launched) continue;
    ++m.launched;
    for (std::size_t n = 0; n < r.meter_flags.size(); ++n) {
      if (r.meter_flags[n] != 0) ++meter_hits[n];
    }
    const auto shared = shared_meters(r.meter_flags, baseline);
    for (std::size_t k = 0; k <= k_max; ++k) {
      if (shared >= k) ++at_least[k];
    }
  }

  if (m.launched > 0) {
    const auto launched = static_cast<double>(m.launched);
    for (std::size_t k = 0; k <= k_max; ++k) m.overlap_counts[k] = static_cast<double>(at_least[k]) / launched;
    for (const auto& [bus, hits] : meter_hits) m.meter_frequency.emplace_back(bus, static_cast<double>(hits) / launched);
  }
  std::stable_sort(m.meter_frequency.begin(), m.meter_frequency.end(),
                   [](const auto& x, const auto& y) { return x.second > y.second; });

  if (!samples.empty()) {
    const auto n = static_cast<double>(samples.size());
    for (const auto& [set, hits] : groups) m.branch_group_frequency.emplace_back(set, static_cast<double>(hits) / n);
  }
  std::stable_sort(m.branch_group_frequency.begin(), m.branch_group_frequency.end(),
                   [](const auto& x, const auto& y) { return x.second > y.second; });
  return m;
}

std::vector<double> cumulative_overlap(std::span<const SampleOutcome> samples, const PerfectBaseline& baseline) {
  const std::size_t k_max = baseline.attacked_meters.size();
  std::vector<std::size_t> exactly(k_max + 1, 0);
  std::size_t launched = 0;
  for (const auto& r : samples) {
    if (!r.launched) continue;
    ++launched;
    ++exactly[shared_meters(r.meter_flags, baseline)];
  }
  std::vector<double> shares(k_max + 1, 0.0);
  if (launched == 0) return shares;
  std::size_t tail = 0;
  for (std::size_t k = k_max + 1; k-- > 0;) {
    tail += exactly[k];
    shares[k] = static_cast<double>(tail) / static_cast<double>(launched);
  }
  return shares;
}

}  // namespace gridrisk
