#include "doctest.h"

#include <numeric>

#include "gridrisk/case_parser.hpp"
#include "gridrisk/grid_core.hpp"
#include "gridrisk/operator_dcopf.hpp"
#include "test_support.hpp"

using namespace gridrisk;

TEST_CASE("two buses: the line limit forces a 20 MW shift") {
  const TrueGrid grid{test::two_bus()};
  const auto r = react(grid, std::vector<double>(2, 0.0));
  REQUIRE(r.status == OperatorStatus::Feasible);
  CHECK(r.redispatch_mw[0] == doctest::Approx(-20.0));
  CHECK(r.redispatch_mw[1] == doctest::Approx(20.0));
  CHECK(r.redispatch_cost == doctest::Approx(1000.0));
  CHECK(std::abs(r.flows_mw[0]) == doctest::Approx(80.0));
}

TEST_CASE("a secure base point needs no redispatch") {
  auto g = test::two_bus();
  g.branches[0].capacity_mw = 150.0;
  const auto r = react(TrueGrid{g}, std::vector<double>(2, 0.0));
  REQUIRE(r.status == OperatorStatus::Feasible);
  for (const double p : r.redispatch_mw) CHECK(p == 0.0);
  CHECK(r.redispatch_cost == 0.0);
}

TEST_CASE("scaling every cost keeps the dispatch optimal") {
  const auto g = test::three_bus_ring();
  const std::vector<double> e{0.0, -10.0, 10.0};
  const auto r = solve_operator_lp(g, e);
  REQUIRE(r.status == OperatorStatus::Feasible);

  auto scaled = g;
  for (auto& gen : scaled.generators) gen.redispatch_cost *= 7.5;
  const auto rs = solve_operator_lp(scaled, e);
  REQUIRE(rs.status == OperatorStatus::Feasible);
  double cost_of_r = 0.0;
  for (std::size_t i = 0; i < g.generator_count(); ++i) {
    cost_of_r += scaled.generators[i].redispatch_cost * std::max(0.0, r.redispatch_mw[i]);
  }
  CHECK(cost_of_r == doctest::Approx(rs.redispatch_cost).epsilon(1e-6));
}

TEST_CASE("redispatch keeps the perceived balance and limits") {
  const auto g = test::three_bus_ring();
  const std::vector<double> e{0.0, 12.0, -12.0};
  const auto r = solve_operator_lp(g, e);
  REQUIRE(r.status == OperatorStatus::Feasible);
  std::vector<double> inj(g.bus_count(), 0.0);
  for (std::size_t i = 0; i < g.generator_count(); ++i) {
    inj[g.generators[i].bus] += g.generators[i].base_dispatch_mw + r.redispatch_mw[i];
  }
  for (std::size_t n = 0; n < g.bus_count(); ++n) inj[n] -= g.buses[n].demand_mw + e[n];
  for (const double res : nodal_residuals(g, inj, r.flows_mw)) CHECK(std::abs(res) < 1e-6);
  for (std::size_t l = 0; l < g.branch_count(); ++l) CHECK(std::abs(r.flows_mw[l]) <= g.branches[l].capacity_mw + 1e-6);
}

TEST_CASE("no redispatch can clear an impossible limit") {
  auto g = test::two_bus();
  g.generators[1].max_output_mw = 5.0;
  const auto r = react(TrueGrid{g}, std::vector<double>(2, 0.0));
  CHECK(r.status == OperatorStatus::Infeasible);
}

TEST_CASE("base dispatch balances the RTS demand in both modes") {
  const auto raw = build_grid(parse_case_file(test::rts_case()), 0.65);
  for (const auto mode : {BaseDispatchMode::Opf, BaseDispatchMode::CasePg}) {
    const auto g = resolve_base_dispatch(raw, mode);
    const auto p0 = g.base_dispatch();
    CHECK(std::accumulate(p0.begin(), p0.end(), 0.0) == doctest::Approx(g.total_demand()).epsilon(1e-9));
    for (const auto& gen : g.generators) {
      CHECK(gen.base_dispatch_mw >= gen.min_output_mw - 1e-6);
      CHECK(gen.base_dispatch_mw <= gen.max_output_mw + 1e-6);
    }
  }
  CHECK(parse_base_dispatch_mode("case-pg") == BaseDispatchMode::CasePg);
  CHECK_THROWS(parse_base_dispatch_mode("dc"));
}
