#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "gridrisk/attacker.hpp"
#include "gridrisk/grid_core.hpp"

namespace gridrisk {

enum class Category { Perfect, Success, PartialSuccess, Failure, NoAttempt };

inline constexpr std::array<Category, 5> kAllCategories = {Category::Perfect, Category::Success,
                                                           Category::PartialSuccess, Category::Failure,
                                                           Category::NoAttempt};

std::string to_string(Category category);
Category parse_category(const std::string& text);

/// Tolerance on e when deciding that two attack vectors are the same.
inline constexpr double kVectorTolerance = 1e-3;  // MW

/// The zero-error attack every imperfect sample is compared against.
struct PerfectBaseline {
  bool found = false;
  std::vector<int> meter_flags;
  std::vector<double> injections_mw;
  ImpactReport impact;
  std::vector<std::size_t> overloaded_branches;  // above threshold, ascending
  std::vector<std::size_t> attacked_meters;      // bus indices, ascending
  std::uint64_t config_hash = 0;
};

PerfectBaseline make_baseline(const AttackerSolution& attack, const ImpactReport& impact, std::uint64_t config_hash);

class BaselineMismatch : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

bool same_attack_vector(std::span<const int> a1, std::span<const double> e1, std::span<const int> a2,
                        std::span<const double> e2);

/// Throws BaselineMismatch when the baseline was produced under another
/// configuration than `config_hash`.
Category classify(const AttackerSolution& attack, const ImpactReport& impact, const PerfectBaseline& baseline,
                  int min_overloads, std::uint64_t config_hash);

/// What analytics needs from one sample.
struct SampleOutcome {
  bool launched = false;
  std::vector<int> meter_flags;
  std::vector<double> injections_mw;
  ImpactReport impact;
  Category category = Category::NoAttempt;
  bool operator_infeasible = false;  // diagnostic flag, does not change the category
};

struct ImpactHistogram {
  double bin_width_mw = 5.0;
  std::vector<std::size_t> counts;  // bin k covers [k w, (k + 1) w)
};

struct RiskSummary {
  std::size_t samples = 0;
  std::array<std::size_t, 5> counts{};  // indexed like kAllCategories
  std::array<double, 5> shares{};
  double share_at_least_one = 0.0;       // >= 1 above-threshold overload
  double share_at_least_u = 0.0;         // >= U above-threshold overloads
  double mean_impact_mw = 0.0;           // total_impact, NoAttempt counted as 0
  double mean_measurable_impact_mw = 0.0;
  std::size_t unique_attack_vectors = 0;  // distinct (a, e rounded to 1e-3 MW)
  std::size_t unique_meter_sets = 0;      // distinct a
  ImpactHistogram histogram;

  [[nodiscard]] std::size_t count(Category c) const { return counts[static_cast<std::size_t>(c)]; }
  [[nodiscard]] double share(Category c) const { return shares[static_cast<std::size_t>(c)]; }
};

RiskSummary summarize(std::span<const SampleOutcome> samples, int min_overloads, double bin_width_mw = 5.0);

struct ManagementReport {
  /// (bus index, share of launched attacks using that meter), most frequent first.
  std::vector<std::pair<std::size_t, double>> meter_frequency;
  /// overlap_counts[k]: share of launched attacks sharing at least k meters
  /// with the baseline, k = 0..|baseline meters|.
  std::vector<double> overlap_counts;
  /// (above-threshold overloaded branch set, share of all samples), most frequent first.
  std::vector<std::pair<std::vector<std::size_t>, double>> branch_group_frequency;
  std::size_t launched = 0;
};

ManagementReport management_report(std::span<const SampleOutcome> samples, const PerfectBaseline& baseline);

/// Share of launched attacks sharing at least k meters with the baseline,
/// accumulated from the histogram of per-attack overlap sizes.
std::vector<double> cumulative_overlap(std::span<const SampleOutcome> samples, const PerfectBaseline& baseline);

}  // namespace gridrisk
