#include "gridrisk/operator_dcopf.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "gridrisk/grid_core.hpp"
#include "lower_level.hpp"

namespace gridrisk {

namespace detail {

LowerLevelBlock add_lower_level(lp::ModelHandle& model, const GridCase& grid,
                                const std::vector<lp::LinearExpr>& falsified_load, const std::string& prefix,
                                bool upward_cap) {
  LowerLevelBlock b;
  for (std::size_t g = 0; g < grid.generator_count(); ++g) {
    const std::string id = std::to_string(g);
    const double lo = b.redispatch_lower(grid, g);
    const double hi = b.redispatch_upper(grid, g);
    b.redispatch.push_back(model.add_variable(prefix + "p_" + id, lo, hi));
    b.upward.push_back(model.add_variable(prefix + "pi_" + id, 0.0, upward_cap ? std::max(0.0, hi) : lp::kInfinity));
  }
  for (std::size_t n = 0; n < grid.bus_count(); ++n) {
    const double bound = n == grid.reference_bus ? 0.0 : lp::kInfinity;
    b.angle.push_back(model.add_variable(prefix + "theta_" + std::to_string(n), -bound, bound));
  }
  for (std::size_t l = 0; l < grid.branch_count(); ++l) {
    const double cap = grid.branches[l].capacity_mw;
    b.flow.push_back(model.add_variable(prefix + "f_" + std::to_string(l), -cap, cap));
  }

  for (std::size_t g = 0; g < grid.generator_count(); ++g) {
    lp::LinearExpr lhs(b.upward[g]);
    lhs.add(b.redispatch[g], -1.0);
    b.cost_link.push_back(model.add_constraint(prefix + "cost_link_" + std::to_string(g), lhs,
                                               lp::RowSense::GreaterEqual));
  }

  std::vector<lp::LinearExpr> net(grid.bus_count());
  for (std::size_t g = 0; g < grid.generator_count(); ++g) {
    const auto bus = grid.generators[g].bus;
    net[bus].add(b.redispatch[g], 1.0);
    net[bus].constant += grid.generators[g].base_dispatch_mw;
  }
  for (std::size_t l = 0; l < grid.branch_count(); ++l) {
    net[grid.branches[l].from].add(b.flow[l], -1.0);
    net[grid.branches[l].to].add(b.flow[l], 1.0);
  }
  for (std::size_t n = 0; n < grid.bus_count(); ++n) {
    b.balance.push_back(
        model.add_constraint(prefix + "balance_" + std::to_string(n), net[n], lp::RowSense::Equal, falsified_load[n]));
  }

  for (std::size_t l = 0; l < grid.branch_count(); ++l) {
    const auto& br = grid.branches[l];
    const double y = grid.susceptance_mw(l);
    lp::LinearExpr lhs(b.flow[l]);
    lhs.add(b.angle[br.from], -y).add(b.angle[br.to], y);
    b.flow_def.push_back(model.add_constraint(prefix + "flow_" + std::to_string(l), lhs, lp::RowSense::Equal));
  }
  return b;
}

lp::LinearExpr lower_level_cost(const GridCase& grid, const LowerLevelBlock& block) {
  lp::LinearExpr cost;
  for (std::size_t g = 0; g < grid.generator_count(); ++g) {
    cost.add(block.upward[g], grid.generators[g].redispatch_cost);
  }
  return cost;
}

}  // namespace detail

std::vector<double> OperatorResponse::physical_injections(const GridCase& grid) const {
  std::vector<double> inj(grid.bus_count(), 0.0);
  for (std::size_t g = 0; g < grid.generator_count(); ++g) {
    const double dispatch = grid.generators[g].base_dispatch_mw + (redispatch_mw.empty() ? 0.0 : redispatch_mw[g]);
    inj[grid.generators[g].bus] += dispatch;
  }
  for (std::size_t n = 0; n < grid.bus_count(); ++n) inj[n] -= grid.buses[n].demand_mw;
  return inj;
}

OperatorResponse solve_operator_lp(const GridCase& grid, std::span<const double> attack_mw,
                                   const lp::SolveSettings& settings) {
  if (attack_mw.size() != grid.bus_count()) throw OperatorError("attack vector does not match the grid");

  lp::ModelHandle model;
  std::vector<lp::LinearExpr> load;
  for (std::size_t n = 0; n < grid.bus_count(); ++n) load.emplace_back(grid.buses[n].demand_mw + attack_mw[n]);
  const auto block = detail::add_lower_level(model, grid, load, "", false);
  model.set_objective(lp::ObjectiveSense::Minimize, detail::lower_level_cost(grid, block));

  const auto outcome = lp::solve(model, settings);
  OperatorResponse r;
  if (outcome.status == lp::SolveStatus::Infeasible) {
    r.status = OperatorStatus::Infeasible;
    return r;
  }
  if (outcome.status != lp::SolveStatus::Optimal) {
    throw OperatorError("operator redispatch LP ended with status " + lp::to_string(outcome.status));
  }
  for (std::size_t g = 0; g < grid.generator_count(); ++g) {
    r.redispatch_mw.push_back(outcome.value(block.redispatch[g]));
    // Tighten pi to its cost-minimal value; equal to the LP value unless c_g = 0.
    r.upward_mw.push_back(std::max(0.0, r.redispatch_mw.back()));
  }
  for (const auto v : block.angle) r.angles_rad.push_back(outcome.value(v));
  for (const auto v : block.flow) r.flows_mw.push_back(outcome.value(v));
  r.redispatch_cost = outcome.objective;
  return r;
}

OperatorResponse react(const TrueGrid& grid, std::span<const double> attack_mw, const lp::SolveSettings& settings) {
  return solve_operator_lp(grid.grid(), attack_mw, settings);
}

OperatorResponse zero_response(const GridCase& grid) {
  OperatorResponse r;
  r.redispatch_mw.assign(grid.generator_count(), 0.0);
  r.upward_mw.assign(grid.generator_count(), 0.0);
  const auto flow = solve_dc_flow(grid, grid.base_injections(), grid.reference_bus);
  r.angles_rad = flow.angles_rad;
  r.flows_mw = flow.flows_mw;
  return r;
}

std::string to_string(BaseDispatchMode mode) { return mode == BaseDispatchMode::Opf ? "opf" : "case-pg"; }

BaseDispatchMode parse_base_dispatch_mode(const std::string& text) {
  if (text == "opf") return BaseDispatchMode::Opf;
  if (text == "case-pg") return BaseDispatchMode::CasePg;
  throw std::invalid_argument("unknown base dispatch mode '" + text + "'");
}

namespace {

// Pushes a small residual onto the generators with the most headroom in the
// needed direction, keeping every output within its limits.
void absorb_imbalance(GridCase& grid) {
  double mismatch = grid.total_demand();
  for (const auto& g : grid.generators) mismatch -= g.base_dispatch_mw;
  if (std::abs(mismatch) == 0.0) return;

  double headroom = 0.0;
  for (const auto& g : grid.generators) {
    headroom += mismatch > 0.0 ? g.max_output_mw - g.base_dispatch_mw : g.base_dispatch_mw - g.min_output_mw;
  }
  if (headroom < std::abs(mismatch) - kBalanceTolerance) {
    throw OperatorError("generation limits cannot balance total demand");
  }
  const double share = headroom > 0.0 ? mismatch / headroom : 0.0;
  for (auto& g : grid.generators) {
    const double room = mismatch > 0.0 ? g.max_output_mw - g.base_dispatch_mw : g.base_dispatch_mw - g.min_output_mw;
    g.base_dispatch_mw = std::clamp(g.base_dispatch_mw + share * room, g.min_output_mw, g.max_output_mw);
  }
}

}  // namespace

GridCase resolve_base_dispatch(GridCase grid, BaseDispatchMode mode, const lp::SolveSettings& settings) {
  for (auto& g : grid.generators) g.base_dispatch_mw = std::clamp(g.base_dispatch_mw, g.min_output_mw, g.max_output_mw);

  if (mode == BaseDispatchMode::Opf) {
    // Economic dispatch with branch limits; the redispatch variables of the
    // lower-level block are offsets from a zero base.
    GridCase zero_base = grid;
    for (auto& g : zero_base.generators) g.base_dispatch_mw = 0.0;

    lp::ModelHandle model;
    std::vector<lp::LinearExpr> load;
    for (const auto& b : zero_base.buses) load.emplace_back(b.demand_mw);
    const auto block = detail::add_lower_level(model, zero_base, load, "", false);
    lp::LinearExpr cost;
    for (std::size_t g = 0; g < grid.generator_count(); ++g) {
      cost.add(block.redispatch[g], grid.generators[g].redispatch_cost);
      if (grid.generators[g].quadratic_cost > 0.0) model.add_square(block.redispatch[g], grid.generators[g].quadratic_cost);
    }
    model.set_objective(lp::ObjectiveSense::Minimize, cost);
    const auto outcome = lp::solve(model, settings);
    if (outcome.status != lp::SolveStatus::Optimal) {
      throw OperatorError("base-point DC-OPF ended with status " + lp::to_string(outcome.status));
    }
    for (std::size_t g = 0; g < grid.generator_count(); ++g) {
      auto& gen = grid.generators[g];
      gen.base_dispatch_mw = std::clamp(outcome.value(block.redispatch[g]), gen.min_output_mw, gen.max_output_mw);
    }
  }
  absorb_imbalance(grid);

  double total = 0.0;
  for (const auto& g : grid.generators) total += g.base_dispatch_mw;
  if (std::abs(total - grid.total_demand()) > kBalanceTolerance) {
    throw OperatorError("base dispatch does not balance demand");
  }
  return grid;
}

}  // namespace gridrisk
