#include "doctest.h"

#include <cmath>
#include <filesystem>

#include "gridrisk/solver.hpp"

using namespace gridrisk::lp;

TEST_CASE("one-variable LP") {
  ModelHandle m;
  const auto x = m.add_variable("x", -kInfinity, kInfinity);
  const auto row = m.add_constraint("low", x, RowSense::GreaterEqual, 3.0);
  m.set_objective(ObjectiveSense::Minimize, x);
  const auto out = solve(m);
  REQUIRE(out.status == SolveStatus::Optimal);
  CHECK(out.objective == doctest::Approx(3.0));
  CHECK(out.value(x) == doctest::Approx(3.0));
  CHECK(std::abs(out.dual(row)) == doctest::Approx(1.0));
}

TEST_CASE("binary knapsack row") {
  ModelHandle m;
  const auto x = m.add_binary("x");
  const auto y = m.add_binary("y");
  m.add_constraint("cap", LinearExpr(x) + y, RowSense::LessEqual, 1.0);
  m.set_objective(ObjectiveSense::Maximize, LinearExpr(x) + y);
  const auto out = solve(m);
  REQUIRE(out.status == SolveStatus::Optimal);
  CHECK(out.objective == doctest::Approx(1.0));
  CHECK(m.has_integers());
  CHECK(m.binary_count() == 2);
}

TEST_CASE("contradictory bounds are infeasible") {
  ModelHandle m;
  const auto x = m.add_variable("x", 0.0, 10.0);
  m.add_constraint("a", x, RowSense::GreaterEqual, 2.0);
  m.add_constraint("b", x, RowSense::LessEqual, 1.0);
  m.set_objective(ObjectiveSense::Minimize, x);
  CHECK(solve(m).status == SolveStatus::Infeasible);
}

TEST_CASE("strong duality on a small transport LP") {
  // min 2a + 3b + c  s.t. a + b >= 4, b + c >= 3, a <= 3
  ModelHandle m;
  const auto a = m.add_variable("a", 0.0, 3.0);
  const auto b = m.add_variable("b", 0.0, kInfinity);
  const auto c = m.add_variable("c", 0.0, kInfinity);
  const auto r1 = m.add_constraint("r1", LinearExpr(a) + b, RowSense::GreaterEqual, 4.0);
  const auto r2 = m.add_constraint("r2", LinearExpr(b) + c, RowSense::GreaterEqual, 3.0);
  m.set_objective(ObjectiveSense::Minimize, 2.0 * LinearExpr(a) + 3.0 * LinearExpr(b) + c);
  const auto out = solve(m);
  REQUIRE(out.status == SolveStatus::Optimal);
  // a = 3, b = 1, c = 2: 6 + 3 + 2 = 11.
  CHECK(out.objective == doctest::Approx(11.0));
  // Dual value: 4 y1 + 3 y2 + 3 * (reduced cost of a at its upper bound).
  const double bound_term = 3.0 * out.reduced_costs[a.index];
  CHECK(4.0 * out.dual(r1) + 3.0 * out.dual(r2) + bound_term == doctest::Approx(out.objective));
}

TEST_CASE("constants fold into the row bound") {
  ModelHandle m;
  const auto x = m.add_variable("x", 0.0, kInfinity);
  LinearExpr lhs(x);
  lhs.constant = 5.0;
  m.add_constraint("shifted", lhs, RowSense::GreaterEqual, LinearExpr(7.0));
  m.set_objective(ObjectiveSense::Minimize, x);
  const auto out = solve(m);
  REQUIRE(out.status == SolveStatus::Optimal);
  CHECK(out.value(x) == doctest::Approx(2.0));
}

TEST_CASE("objective list on one LP") {
  ModelHandle m;
  const auto x = m.add_variable("x", 0.0, 4.0);
  const auto y = m.add_variable("y", 0.0, 4.0);
  m.add_constraint("sum", LinearExpr(x) + y, RowSense::LessEqual, 5.0);
  std::vector<Objective> objectives(3);
  objectives[0] = {ObjectiveSense::Maximize, {{x, 1.0}}, 0.0, {}};
  objectives[1] = {ObjectiveSense::Minimize, {{x, 1.0}, {y, -1.0}}, 0.0, {}};
  objectives[2] = {ObjectiveSense::Maximize, {{x, 1.0}, {y, 1.0}}, 1.0, {}};
  const auto outs = solve_each(m, objectives);
  REQUIRE(outs.size() == 3);
  CHECK(outs[0].objective == doctest::Approx(4.0));
  CHECK(outs[1].objective == doctest::Approx(-4.0));
  CHECK(outs[2].objective == doctest::Approx(6.0));
}

TEST_CASE("LP text round trip keeps the optimum") {
  ModelHandle m;
  const auto x = m.add_variable("x", 0.0, 10.0);
  const auto y = m.add_binary("y");
  m.add_constraint("link", LinearExpr(x) - 10.0 * LinearExpr(y), RowSense::LessEqual, 0.0);
  m.add_constraint("cap", LinearExpr(x) + 2.0 * LinearExpr(y), RowSense::LessEqual, 7.5);
  m.set_objective(ObjectiveSense::Maximize, LinearExpr(x) + 0.5 * LinearExpr(y));
  const auto path = std::filesystem::temp_directory_path() / "gridrisk_roundtrip.lp";
  write_lp(m, path.string());
  const auto back = read_lp(path.string());
  std::filesystem::remove(path);
  CHECK(back.variables().size() == m.variables().size());
  CHECK(back.constraints().size() == m.constraints().size());
  CHECK(back.binary_count() == 1);
  const auto a = solve(m);
  const auto b = solve(back);
  REQUIRE(a.status == SolveStatus::Optimal);
  REQUIRE(b.status == SolveStatus::Optimal);
  CHECK(a.objective == doctest::Approx(6.0));
  CHECK(b.objective == doctest::Approx(a.objective));
}

TEST_CASE("invalid models are rejected before solving") {
  ModelHandle m;
  const auto x = m.add_variable("x", 0.0, 1.0);
  m.set_objective(ObjectiveSense::Minimize, x);
  ModelHandle crossed = m;
  crossed.set_bounds(x, 2.0, 1.0);
  CHECK_THROWS_AS(solve(crossed), SolverError);
  ModelHandle dangling = m;
  dangling.add_constraint("bad", LinearExpr(VarId{7}), RowSense::LessEqual, 0.0);
  CHECK_THROWS_AS(solve(dangling), SolverError);
}
