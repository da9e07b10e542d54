#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "gridrisk/case_parser.hpp"
#include "gridrisk/grid_core.hpp"
#include "test_support.hpp"

using namespace gridrisk;

namespace {

std::vector<double> balanced_injections(std::size_t n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-200.0, 200.0);
  std::vector<double> p(n);
  for (auto& v : p) v = u(rng);
  const double sum = std::accumulate(p.begin(), p.end(), 0.0);
  for (auto& v : p) v -= sum / static_cast<double>(n);
  return p;
}

double max_abs(std::span<const double> v) {
  double m = 0.0;
  for (const double x : v) m = std::max(m, std::abs(x));
  return m;
}

}  // namespace

TEST_CASE("two buses: the single line carries everything") {
  const auto g = test::two_bus();
  const std::vector<double> p{100.0, -100.0};
  const auto s = solve_dc_flow(g, p, 0);
  CHECK(s.flows_mw[0] == doctest::Approx(100.0).epsilon(1e-12));
  CHECK(s.angles_rad[0] == 0.0);
  CHECK(s.angles_rad[1] == doctest::Approx(-0.1).epsilon(1e-12));
}

TEST_CASE("three-bus ring splits 2:1 between the direct and two-hop paths") {
  auto g = test::three_bus_ring();
  const std::vector<double> p{90.0, -90.0, 0.0};
  const auto s = solve_dc_flow(g, p, 0);
  CHECK(s.flows_mw[0] == doctest::Approx(60.0).epsilon(1e-12));   // 0 -> 1
  CHECK(s.flows_mw[1] == doctest::Approx(30.0).epsilon(1e-12));   // 0 -> 2
  CHECK(s.flows_mw[2] == doctest::Approx(-30.0).epsilon(1e-12));  // 1 -> 2, so 30 MW from 2 to 1
}

TEST_CASE("zero injections give a flat state") {
  const auto g = test::three_bus_ring();
  const auto s = solve_dc_flow(g, std::vector<double>(3, 0.0), 1);
  CHECK(max_abs(s.angles_rad) == 0.0);
  CHECK(max_abs(s.flows_mw) == 0.0);
}

TEST_CASE("unbalanced or mismatched injections are rejected") {
  const auto g = test::three_bus_ring();
  CHECK_THROWS_AS(solve_dc_flow(g, std::vector<double>{1.0, 0.0, 0.0}, 0), FlowError);
  CHECK_THROWS_AS(solve_dc_flow(g, std::vector<double>{0.0, 0.0}, 0), FlowError);
  CHECK_THROWS_AS(solve_dc_flow(g, std::vector<double>(3, 0.0), 3), FlowError);
}

TEST_CASE("RTS flows: conservation, reference independence and linearity") {
  const auto g = build_grid(parse_case_file(test::rts_case()), 0.65);
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 10; ++trial) {
    const auto p = balanced_injections(g.bus_count(), rng);
    const auto q = balanced_injections(g.bus_count(), rng);
    const auto s = solve_dc_flow(g, p, g.reference_bus);
    CHECK(max_abs(nodal_residuals(g, p, s.flows_mw)) < 1e-8);

    const auto other = solve_dc_flow(g, p, (g.reference_bus + 5) % g.bus_count());
    for (std::size_t l = 0; l < g.branch_count(); ++l) CHECK(std::abs(other.flows_mw[l] - s.flows_mw[l]) < 1e-8);

    std::vector<double> combo(p.size());
    for (std::size_t n = 0; n < p.size(); ++n) combo[n] = 2.0 * p[n] - 0.5 * q[n];
    const auto sq = solve_dc_flow(g, q, g.reference_bus);
    const auto sc = solve_dc_flow(g, combo, g.reference_bus);
    for (std::size_t l = 0; l < g.branch_count(); ++l) {
      CHECK(std::abs(sc.flows_mw[l] - (2.0 * s.flows_mw[l] - 0.5 * sq.flows_mw[l])) < 1e-8);
    }
  }
}

TEST_CASE("impact counts only flows at or beyond the threshold") {
  GridCase g;
  g.buses = {{1, 0.0}, {2, 0.0}};
  g.branches = {{0, 1, 0.1, 100.0}, {0, 1, 0.1, 100.0}, {0, 1, 0.1, 100.0}};
  FlowState s;
  s.flows_mw = {-109.1, 103.0, 50.0};
  const auto r = measure_impact(g, s, uniform_thresholds(g, 1.05));
  REQUIRE(r.overloaded.size() == 1);
  CHECK(r.overloaded[0].branch == 0);
  CHECK(r.overloaded[0].direction == FlowDirection::Negative);
  CHECK(r.overloaded[0].loading_ratio == doctest::Approx(1.091));
  CHECK(r.overloaded[0].excess_mw == doctest::Approx(9.1));
  CHECK(r.total_impact == doctest::Approx(9.1));
  CHECK(r.measurable_impact == doctest::Approx(4.1));
  REQUIRE(r.sub_threshold_overloads.size() == 1);
  CHECK(r.sub_threshold_overloads[0].branch == 1);
  CHECK(r.count_above_threshold == 1);

  s.flows_mw = {100.0, -99.0, 0.0};
  const auto secure = measure_impact(g, s, uniform_thresholds(g, 1.05));
  CHECK(secure.overloaded.empty());
  CHECK(secure.sub_threshold_overloads.empty());
  CHECK(secure.total_impact == 0.0);
}
