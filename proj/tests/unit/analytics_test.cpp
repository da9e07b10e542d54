#include "doctest.h"

#include <numeric>

#include "gridrisk/analytics.hpp"

using namespace gridrisk;

namespace {

constexpr std::uint64_t kHash = 42;

Overload over(std::size_t branch, double ratio) {
  return {branch, FlowDirection::Positive, ratio, (ratio - 1.0) * 100.0};
}

ImpactReport impact(std::vector<Overload> above, std::vector<Overload> below = {}) {
  ImpactReport r;
  r.overloaded = std::move(above);
  r.sub_threshold_overloads = std::move(below);
  r.count_above_threshold = r.overloaded.size();
  for (const auto& o : r.overloaded) {
    r.total_impact += o.excess_mw;
    r.measurable_impact += o.excess_mw - 5.0;
  }
  return r;
}

AttackerSolution attack(std::vector<int> a, std::vector<double> e) {
  AttackerSolution s;
  s.status = AttackStatus::Found;
  s.meter_flags = std::move(a);
  s.injections_mw = std::move(e);
  return s;
}

PerfectBaseline baseline() {
  return make_baseline(attack({1, 1, 1, 0}, {10.0, -4.0, -6.0, 0.0}), impact({over(0, 1.09), over(2, 1.18)}), kHash);
}

SampleOutcome outcome(const AttackerSolution& s, const ImpactReport& r, Category c) {
  return {s.status == AttackStatus::Found, s.meter_flags, s.injections_mw, r, c, false};
}

}  // namespace

TEST_CASE("classification routes") {
  const auto b = baseline();
  CHECK(b.attacked_meters == std::vector<std::size_t>{0, 1, 2});
  CHECK(b.overloaded_branches == std::vector<std::size_t>{0, 2});

  CHECK(classify(AttackerSolution{}, ImpactReport{}, b, 2, kHash) == Category::NoAttempt);
  CHECK(classify(attack({1, 1, 1, 0}, {10.0005, -4.0, -6.0005, 0.0}), b.impact, b, 2, kHash) == Category::Perfect);
  const auto other = attack({1, 0, 1, 1}, {5.0, 0.0, -6.0, 1.0});
  CHECK(classify(other, impact({over(0, 1.2), over(1, 1.1)}), b, 2, kHash) == Category::Success);
  CHECK(classify(other, impact({over(0, 1.2)}), b, 2, kHash) == Category::PartialSuccess);
  CHECK(classify(other, impact({}, {over(0, 1.03)}), b, 2, kHash) == Category::Failure);
  CHECK(classify(attack({1, 1, 1, 0}, {10.01, -4.0, -6.01, 0.0}), impact({}), b, 2, kHash) == Category::Failure);
  CHECK_THROWS_AS(classify(other, impact({}), b, 2, kHash + 1), BaselineMismatch);
}

TEST_CASE("summary shares") {
  const auto b = baseline();
  const auto base_attack = attack(b.meter_flags, b.injections_mw);
  std::vector<SampleOutcome> perfect(4, outcome(base_attack, b.impact, Category::Perfect));
  const auto s = summarize(perfect, 2);
  CHECK(s.share(Category::Perfect) == 1.0);
  CHECK(s.share(Category::NoAttempt) == 0.0);
  CHECK(s.unique_attack_vectors == 1);
  CHECK(s.share_at_least_u == 1.0);
  CHECK(s.mean_impact_mw == doctest::Approx(b.impact.total_impact));

  const std::vector<SampleOutcome> none{outcome(AttackerSolution{}, ImpactReport{}, Category::NoAttempt)};
  const auto z = summarize(none, 2, 5.0);
  REQUIRE(z.histogram.counts.size() == 1);
  CHECK(z.histogram.counts[0] == 1);
  CHECK(z.share(Category::NoAttempt) == 1.0);

  std::vector<SampleOutcome> mixed = perfect;
  mixed.push_back(none[0]);
  mixed.push_back(outcome(attack({0, 1, 1, 1}, {0.0, 3.0, -2.0, -1.0}), impact({over(1, 1.06)}),
                          Category::PartialSuccess));
  mixed.push_back(outcome(attack({0, 1, 1, 1}, {0.0, 3.0, -2.0, -1.4}), impact({}), Category::Failure));
  const auto m = summarize(mixed, 2, 5.0);
  double total = 0.0;
  for (const double share : m.shares) total += share;
  CHECK(std::abs(total - 1.0) < 1e-9);
  CHECK(m.unique_attack_vectors == 3);
  CHECK(m.unique_meter_sets == 2);
  CHECK(m.share_at_least_one == doctest::Approx(5.0 / 7.0));
  const auto hist_total = std::accumulate(m.histogram.counts.begin(), m.histogram.counts.end(), std::size_t{0});
  CHECK(hist_total == mixed.size());
}

TEST_CASE("management report") {
  const auto b = baseline();
  const auto base_attack = attack(b.meter_flags, b.injections_mw);
  const std::vector<SampleOutcome> same(3, outcome(base_attack, b.impact, Category::Perfect));
  const auto r = management_report(same, b);
  REQUIRE(r.meter_frequency.size() == 3);
  for (const auto& [bus, share] : r.meter_frequency) {
    CHECK(share == 1.0);
    CHECK(b.meter_flags[bus] == 1);
  }
  REQUIRE(r.branch_group_frequency.size() == 1);
  CHECK(r.branch_group_frequency[0].first == b.overloaded_branches);

  std::vector<SampleOutcome> mixed = same;
  mixed.push_back(outcome(attack({0, 1, 1, 1}, {0.0, 3.0, -2.0, -1.0}), impact({over(1, 1.06)}),
                          Category::PartialSuccess));
  mixed.push_back(outcome(attack({0, 0, 1, 1}, {0.0, 0.0, -2.0, 2.0}), impact({}), Category::Failure));
  mixed.push_back(outcome(AttackerSolution{}, ImpactReport{}, Category::NoAttempt));
  const auto m = management_report(mixed, b);
  CHECK(m.launched == 5);
  REQUIRE(m.overlap_counts.size() == 4);
  CHECK(m.overlap_counts[1] == 1.0);
  CHECK(m.overlap_counts[2] == doctest::Approx(4.0 / 5.0));
  CHECK(m.overlap_counts[3] == doctest::Approx(3.0 / 5.0));
  for (std::size_t k = 1; k < m.overlap_counts.size(); ++k) CHECK(m.overlap_counts[k] <= m.overlap_counts[k - 1]);
  CHECK(m.overlap_counts == cumulative_overlap(mixed, b));

  // Bus 2 is in every launched attack, bus 1 in four of five.
  REQUIRE(m.meter_frequency.size() == 4);
  CHECK(m.meter_frequency[0].first == 2);
  CHECK(m.meter_frequency[0].second == 1.0);
  CHECK(m.meter_frequency[1].first == 1);
  CHECK(m.meter_frequency[1].second == doctest::Approx(0.8));

  double group_total = 0.0;
  for (const auto& [set, share] : m.branch_group_frequency) group_total += share;
  CHECK(group_total == doctest::Approx(1.0));
  CHECK(m.branch_group_frequency[0].first == b.overloaded_branches);
}

TEST_CASE("category names round trip") {
  for (const auto c : kAllCategories) CHECK(parse_category(to_string(c)) == c);
  CHECK_THROWS(parse_category("Partial"));
}
