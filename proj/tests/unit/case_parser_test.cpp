#include "doctest.h"

#include <sstream>

#include "gridrisk/case_parser.hpp"
#include "test_support.hpp"

using namespace gridrisk;
using gridrisk::test::fixture;

namespace {

CaseError::Kind error_kind(const std::string& file) {
  try {
    const auto grid = build_grid(parse_case_file(fixture(file)), 1.0);
    require_connected(grid);
  } catch (const CaseError& e) {
    return e.kind();
  }
  FAIL("expected a CaseError from " << file);
  return CaseError::Kind::Unreadable;
}

}  // namespace

TEST_CASE("two-bus fixture gives one row per table entry") {
  const auto t = parse_case_file(fixture("two_bus.m"));
  CHECK(t.base_mva == 100.0);
  CHECK(t.bus.size() == 2);
  CHECK(t.gen.size() == 1);
  CHECK(t.branch.size() == 1);
  CHECK(t.gencost.size() == 1);

  const auto g = build_grid(t, 1.0);
  CHECK(g.reference_bus == 0);
  CHECK(g.buses[1].demand_mw == 100.0);
  CHECK(g.branches[0].reactance_pu == 0.1);
  CHECK(g.generators[0].redispatch_cost == 10.0);
}

TEST_CASE("RTS case sizes") {
  const auto t = parse_case_file(test::rts_case());
  CHECK(t.bus.size() == 24);
  CHECK(t.branch.size() == 38);
  CHECK(t.gen.size() == 33);
  const auto g = build_grid(t, 0.65);
  CHECK(g.bus_count() == 24);
  CHECK(g.branch_count() == 38);
  CHECK(g.generator_count() == 33);
  CHECK(g.buses[g.reference_bus].external_id == 13);
  CHECK_NOTHROW(require_connected(g));
}

TEST_CASE("capacity scale multiplies every rating") {
  const auto t = parse_case_file(test::rts_case());
  const auto scaled = build_grid(t, 0.65);
  const auto full = build_grid(t, 1.0);
  for (std::size_t l = 0; l < t.branch.size(); ++l) {
    CHECK(full.branches[l].capacity_mw == t.branch[l][5]);
    CHECK(scaled.branches[l].capacity_mw == doctest::Approx(0.65 * t.branch[l][5]).epsilon(1e-15));
  }
  CHECK_THROWS_AS(build_grid(t, 0.0), CaseError);
  CHECK_THROWS_AS(build_grid(t, 1.5), CaseError);
}

TEST_CASE("malformed inputs") {
  CHECK(error_kind("missing_bus.m") == CaseError::Kind::MissingTable);
  CHECK(error_kind("zero_reactance.m") == CaseError::Kind::NonPositiveReactance);
  CHECK(error_kind("non_numeric.m") == CaseError::Kind::NonNumericToken);
  CHECK(error_kind("short_row.m") == CaseError::Kind::MalformedRow);
  CHECK(error_kind("disconnected.m") == CaseError::Kind::DisconnectedGraph);
  CHECK(error_kind("pmin_above_pmax.m") == CaseError::Kind::InvalidGenerator);
  CHECK(error_kind("no_such_file.m") == CaseError::Kind::Unreadable);
}

TEST_CASE("comments and other fields are ignored") {
  std::istringstream in(
      "mpc.version = '2'; % format\n"
      "mpc.baseMVA = 100;\n"
      "mpc.areas = [1 1];\n"
      "mpc.bus = [ % id type Pd\n"
      " 1 3 0 0 0 0 1 1 0 138 1 1.05 0.95;\n"
      " 2 1 50 0 0 0 1 1 0 138 1 1.05 0.95\n"
      "];\n"
      "mpc.gen = [1 50 0 0 0 1 100 1 100 0 0 0 0 0 0 0 0 0 0 0 0];\n"
      "mpc.branch = [1 2 0 0.2 0 60 0 0 0 0 1 -360 360];\n"
      "mpc.gencost = [2 0 0 2 7 0];\n");
  const auto t = parse_case(in);
  CHECK(t.bus.size() == 2);
  CHECK(t.branch.size() == 1);
  const auto g = build_grid(t, 1.0);
  CHECK(g.generators[0].redispatch_cost == 7.0);
}
