#include "gridrisk/attacker.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "gridrisk/case_parser.hpp"
#include "gridrisk/grid_core.hpp"
#include "lower_level.hpp"

namespace gridrisk {

void AttackerConfig::validate() const {
  if (min_overloads < 0) throw ConfigError("min_overloads must be non-negative");
  if (budget < 0) throw ConfigError("budget must be non-negative");
  if (!(epsilon >= 0.0 && epsilon < 1.0)) throw ConfigError("epsilon must lie in [0, 1)");
  if (!(rho >= 1.0)) throw ConfigError("rho must be at least 1");
  if (big_m_flag && !(*big_m_flag > 0.0)) throw ConfigError("big_m_flag must be positive");
  if (!(big_m_dual > 0.0)) throw ConfigError("big_m_dual must be positive");
  if (big_m_retries < 0) throw ConfigError("big_m_retries must be non-negative");
}

int AttackerSolution::meters_used() const { return std::accumulate(meter_flags.begin(), meter_flags.end(), 0); }

namespace {

using lp::LinearExpr;
using lp::RowSense;
using lp::VarId;

constexpr double kAuditFraction = 0.99;
constexpr double kZeroInjection = 1e-6;  // MW
constexpr double kRangePad = 1e-4;       // MW, slack on relaxation flow bounds

struct FlowRange {
  double lo = -lp::kInfinity;
  double hi = lp::kInfinity;
};

struct KktBlock {
  detail::LowerLevelBlock primal;
  std::vector<VarId> bounded_duals;
  std::vector<double> dual_bounds;
};

// slack >= 0 and dual >= 0 cannot both be positive: one binary per pair.
void add_complementarity(lp::ModelHandle& model, const std::string& name, const LinearExpr& slack, VarId dual,
                         double slack_bound, double dual_bound) {
  if (slack_bound <= 0.0 || dual_bound <= 0.0) return;  // one side is identically zero
  const VarId z = model.add_binary("z_" + name);
  model.add_constraint("cs_slack_" + name, slack + LinearExpr(z, slack_bound), RowSense::LessEqual, slack_bound);
  model.add_constraint("cs_dual_" + name, LinearExpr(dual) - LinearExpr(z, dual_bound), RowSense::LessEqual);
}

// Lower-level primal feasibility, stationarity and complementary slackness.
// `ranges`, when given, holds the range of each lower-level flow followed by
// each redispatch; a limit that can never be reached has a zero multiplier
// and needs no binary.
KktBlock add_kkt(lp::ModelHandle& model, const GridCase& grid, const std::vector<LinearExpr>& load,
                 double dual_bound, std::span<const FlowRange> ranges = {}) {
  KktBlock k;
  auto& p = k.primal;
  p = detail::add_lower_level(model, grid, load, "ll_", true);

  std::vector<VarId> balance_dual, flow_dual;
  for (std::size_t n = 0; n < grid.bus_count(); ++n) balance_dual.push_back(model.add_free("lambda_" + std::to_string(n)));
  for (std::size_t l = 0; l < grid.branch_count(); ++l) flow_dual.push_back(model.add_free("eta_" + std::to_string(l)));

  for (std::size_t g = 0; g < grid.generator_count(); ++g) {
    const std::string id = std::to_string(g);
    const double cost = grid.generators[g].redispatch_cost;
    const double lo = p.redispatch_lower(grid, g);
    const double hi = p.redispatch_upper(grid, g);
    const double upward_cap = std::max(0.0, hi);

    // Stationarity in pi forces both multipliers into [0, c_g].
    const VarId mu_zero = model.add_variable("mu0_" + id, 0.0, cost);
    const VarId mu_link = model.add_variable("mu1_" + id, 0.0, cost);
    const VarId nu_lo = model.add_variable("nulo_" + id, 0.0, dual_bound);
    const VarId nu_hi = model.add_variable("nuhi_" + id, 0.0, dual_bound);
    k.bounded_duals.insert(k.bounded_duals.end(), {nu_lo, nu_hi});
    k.dual_bounds.insert(k.dual_bounds.end(), {dual_bound, dual_bound});

    model.add_constraint("stat_pi_" + id, LinearExpr(mu_zero) + LinearExpr(mu_link), RowSense::Equal, cost);
    LinearExpr stat_p;
    stat_p.add(mu_link, 1.0).add(nu_lo, -1.0).add(nu_hi, 1.0).add(balance_dual[grid.generators[g].bus], -1.0);
    model.add_constraint("stat_p_" + id, stat_p, RowSense::Equal);

    const LinearExpr pi(p.upward[g]);
    const LinearExpr pg(p.redispatch[g]);
    double reach_lo = lo;
    double reach_hi = hi;
    if (!ranges.empty()) {
      reach_lo = std::max(lo, ranges[grid.branch_count() + g].lo - kRangePad);
      reach_hi = std::min(hi, ranges[grid.branch_count() + g].hi + kRangePad);
    }
    add_complementarity(model, "pi0_" + id, pi, mu_zero, upward_cap, cost);
    add_complementarity(model, "pilink_" + id, pi - pg, mu_link, upward_cap - lo, cost);
    if (reach_lo <= lo + kRangePad) {
      add_complementarity(model, "plo_" + id, pg - LinearExpr(lo), nu_lo, reach_hi - lo, dual_bound);
    } else {
      model.fix(nu_lo, 0.0);
    }
    if (reach_hi >= hi - kRangePad) {
      add_complementarity(model, "phi_" + id, LinearExpr(hi) - pg, nu_hi, hi - reach_lo, dual_bound);
    } else {
      model.fix(nu_hi, 0.0);
    }
  }

  for (std::size_t l = 0; l < grid.branch_count(); ++l) {
    const std::string id = std::to_string(l);
    const auto& br = grid.branches[l];
    const double cap = br.capacity_mw;
    const VarId sigma_lo = model.add_variable("siglo_" + id, 0.0, dual_bound);
    const VarId sigma_hi = model.add_variable("sighi_" + id, 0.0, dual_bound);
    k.bounded_duals.insert(k.bounded_duals.end(), {sigma_lo, sigma_hi});
    k.dual_bounds.insert(k.dual_bounds.end(), {dual_bound, dual_bound});

    LinearExpr stat_f;
    stat_f.add(balance_dual[br.from], 1.0).add(balance_dual[br.to], -1.0).add(flow_dual[l], -1.0);
    stat_f.add(sigma_lo, -1.0).add(sigma_hi, 1.0);
    model.add_constraint("stat_f_" + id, stat_f, RowSense::Equal);

    const LinearExpr f(p.flow[l]);
    double lo_slack = 2.0 * cap;
    double hi_slack = 2.0 * cap;
    bool lo_reachable = true;
    bool hi_reachable = true;
    if (!ranges.empty()) {
      const auto& range = ranges[l];
      lo_reachable = range.lo <= -cap + kRangePad;
      hi_reachable = range.hi >= cap - kRangePad;
      lo_slack = std::min(lo_slack, range.hi + cap + kRangePad);
      hi_slack = std::min(hi_slack, cap - range.lo + kRangePad);
    }
    if (lo_reachable) {
      add_complementarity(model, "flo_" + id, f + LinearExpr(cap), sigma_lo, lo_slack, dual_bound);
    } else {
      model.fix(sigma_lo, 0.0);
    }
    if (hi_reachable) {
      add_complementarity(model, "fhi_" + id, LinearExpr(cap) - f, sigma_hi, hi_slack, dual_bound);
    } else {
      model.fix(sigma_hi, 0.0);
    }
  }

  // Angle stationarity, scaled by 1/base_mva.
  std::vector<LinearExpr> stat_theta(grid.bus_count());
  for (std::size_t l = 0; l < grid.branch_count(); ++l) {
    const double w = 1.0 / grid.branches[l].reactance_pu;
    stat_theta[grid.branches[l].from].add(flow_dual[l], w);
    stat_theta[grid.branches[l].to].add(flow_dual[l], -w);
  }
  for (std::size_t n = 0; n < grid.bus_count(); ++n) {
    if (n == grid.reference_bus) continue;
    model.add_constraint("stat_theta_" + std::to_string(n), stat_theta[n], RowSense::Equal);
  }
  return k;
}

GridCase with_operating_point(const GridCase& grid, std::span<const double> demands,
                              std::span<const double> base_dispatch) {
  if (demands.size() != grid.bus_count() || base_dispatch.size() != grid.generator_count()) {
    throw ConfigError("demand or base dispatch vector does not match the grid");
  }
  GridCase g = grid;
  for (std::size_t n = 0; n < g.bus_count(); ++n) {
    if (demands[n] < 0.0) throw ConfigError("demands must be non-negative");
    g.buses[n].demand_mw = demands[n];
  }
  for (std::size_t i = 0; i < g.generator_count(); ++i) g.generators[i].base_dispatch_mw = base_dispatch[i];
  return g;
}

// Units at one bus with equal cost, limits and base point are
// interchangeable in the redispatch LP: merged, they leave its optimal cost
// unchanged and share one set of complementarity pairs.
struct UnitGroups {
  GridCase merged;
  std::vector<std::size_t> group_of;  // original generator -> merged unit
  std::vector<int> size;              // generators per merged unit
};

UnitGroups merge_identical_units(const GridCase& grid) {
  UnitGroups u;
  u.merged = grid;
  u.merged.generators.clear();
  for (const auto& gen : grid.generators) {
    std::size_t k = 0;
    for (; k < u.merged.generators.size(); ++k) {
      const auto& m = u.merged.generators[k];
      const double n = u.size[k];
      if (m.bus == gen.bus && m.redispatch_cost == gen.redispatch_cost && m.min_output_mw == n * gen.min_output_mw &&
          m.max_output_mw == n * gen.max_output_mw && m.base_dispatch_mw == n * gen.base_dispatch_mw) {
        break;
      }
    }
    if (k == u.merged.generators.size()) {
      u.merged.generators.push_back(gen);
      u.size.push_back(1);
    } else {
      auto& m = u.merged.generators[k];
      const double n = u.size[k];
      m.min_output_mw = (n + 1) * gen.min_output_mw;
      m.max_output_mw = (n + 1) * gen.max_output_mw;
      m.base_dispatch_mw = (n + 1) * gen.base_dispatch_mw;
      ++u.size[k];
    }
    u.group_of.push_back(k);
  }
  return u;
}

// Spreads each merged unit's redispatch evenly over its members.
void split_units(const UnitGroups& u, const GridCase& grid, OperatorResponse& r) {
  std::vector<double> p, pi;
  for (std::size_t g = 0; g < u.group_of.size(); ++g) {
    const auto k = u.group_of[g];
    p.push_back(r.redispatch_mw[k] / u.size[k]);
    pi.push_back(r.upward_mw[k] / u.size[k]);
  }
  r.redispatch_mw = std::move(p);
  r.upward_mw = std::move(pi);
  r.redispatch_cost = 0.0;
  for (std::size_t g = 0; g < grid.generator_count(); ++g) r.redispatch_cost += grid.generators[g].redispatch_cost * r.upward_mw[g];
}

// Ranges over the continuous relaxation (fractional meters, any feasible
// redispatch, no optimality conditions) of the perceived flows, then the
// operator's flows, then each redispatch. Empty when the relaxation is
// infeasible, in which case so is the attack model.
std::vector<FlowRange> relaxation_ranges(const GridCase& grid, const AttackerConfig& config,
                                             const lp::SolveSettings& settings) {
  lp::ModelHandle model;
  const std::size_t nb = grid.bus_count();
  LinearExpr meters, injected;
  std::vector<LinearExpr> load(nb);
  for (std::size_t n = 0; n < nb; ++n) {
    const double reach = config.epsilon * grid.buses[n].demand_mw;
    const VarId a = model.add_variable("a_" + std::to_string(n), 0.0, reach > 0.0 ? 1.0 : 0.0);
    const VarId e = model.add_variable("e_" + std::to_string(n), -reach, reach);
    model.add_constraint("e_up_" + std::to_string(n), LinearExpr(e) - LinearExpr(a, reach), RowSense::LessEqual);
    model.add_constraint("e_dn_" + std::to_string(n), LinearExpr(e) + LinearExpr(a, reach), RowSense::GreaterEqual);
    meters.add(a, 1.0);
    injected.add(e, 1.0);
    load[n] = LinearExpr(grid.buses[n].demand_mw) + LinearExpr(e);
  }
  model.add_constraint("budget", meters, RowSense::LessEqual, static_cast<double>(config.budget));
  model.add_constraint("attack_balance", injected, RowSense::Equal);
  const auto block = detail::add_lower_level(model, grid, load, "ll_", true);

  std::vector<VarId> angle, flow;
  for (std::size_t n = 0; n < nb; ++n) {
    const double bound = n == grid.reference_bus ? 0.0 : lp::kInfinity;
    angle.push_back(model.add_variable("theta_ca_" + std::to_string(n), -bound, bound));
  }
  std::vector<LinearExpr> net(nb);
  for (std::size_t g = 0; g < grid.generator_count(); ++g) {
    net[grid.generators[g].bus] += LinearExpr(grid.generators[g].base_dispatch_mw) + LinearExpr(block.redispatch[g]);
  }
  for (std::size_t l = 0; l < grid.branch_count(); ++l) {
    const auto& br = grid.branches[l];
    flow.push_back(model.add_free("f_ca_" + std::to_string(l)));
    net[br.from].add(flow[l], -1.0);
    net[br.to].add(flow[l], 1.0);
    const double y = grid.susceptance_mw(l);
    LinearExpr def(flow[l]);
    def.add(angle[br.from], -y).add(angle[br.to], y);
    model.add_constraint("flow_ca_" + std::to_string(l), def, RowSense::Equal);
  }
  for (std::size_t n = 0; n < nb; ++n) {
    model.add_constraint("balance_ca_" + std::to_string(n), net[n], RowSense::Equal, grid.buses[n].demand_mw);
  }

  lp::SolveSettings lp_settings = settings;
  lp_settings.dump_lp_path.reset();
  std::vector<VarId> targets = flow;
  targets.insert(targets.end(), block.flow.begin(), block.flow.end());
  targets.insert(targets.end(), block.redispatch.begin(), block.redispatch.end());
  std::vector<lp::Objective> objectives;
  for (const VarId target : targets) {
    for (const auto sense : {lp::ObjectiveSense::Maximize, lp::ObjectiveSense::Minimize}) {
      lp::Objective o;
      o.sense = sense;
      o.terms = {{target, 1.0}};
      objectives.push_back(std::move(o));
    }
  }
  const auto outcomes = lp::solve_each(model, objectives, lp_settings);
  std::vector<FlowRange> ranges(targets.size());
  for (std::size_t k = 0; k < outcomes.size(); ++k) {
    const auto& out = outcomes[k];
    if (out.status == lp::SolveStatus::Infeasible) return {};
    if (out.status != lp::SolveStatus::Optimal) continue;  // keep the trivial bound
    (k % 2 == 0 ? ranges[k / 2].hi : ranges[k / 2].lo) = out.objective;
  }
  return ranges;
}

double default_flag_m(const GridCase& grid, std::size_t branch) {
  return 2.0 * grid.total_demand() + grid.branches[branch].capacity_mw;
}

AttackModel build_model(const GridCase& grid, const AttackerConfig& config, const std::vector<FlowRange>& ranges,
                        double m_scale) {
  config.validate();
  require_connected(grid);
  AttackModel am;
  auto& model = am.model;
  const std::size_t nb = grid.bus_count();
  const std::size_t nl = grid.branch_count();

  // Attack vector.
  LinearExpr meters_used, injected;
  std::vector<LinearExpr> falsified_load(nb);
  for (std::size_t n = 0; n < nb; ++n) {
    const std::string id = std::to_string(n);
    const double d = grid.buses[n].demand_mw;
    const double reach = config.epsilon * d;
    am.meter.push_back(model.add_binary("a_" + id));
    if (d <= 0.0) model.fix(am.meter.back(), 0.0);
    am.injection.push_back(model.add_variable("e_" + id, -reach, reach));
    model.add_constraint("e_up_" + id, LinearExpr(am.injection[n]) - LinearExpr(am.meter[n], reach), RowSense::LessEqual);
    model.add_constraint("e_dn_" + id, LinearExpr(am.injection[n]) + LinearExpr(am.meter[n], reach),
                         RowSense::GreaterEqual);
    meters_used.add(am.meter[n], 1.0);
    injected.add(am.injection[n], 1.0);
    falsified_load[n] = LinearExpr(d) + LinearExpr(am.injection[n]);
  }
  model.add_constraint("budget", meters_used, RowSense::LessEqual, static_cast<double>(config.budget));
  model.add_constraint("attack_balance", injected, RowSense::Equal);

  // Operator, through its optimality conditions.
  const std::span<const FlowRange> ll_ranges =
      ranges.empty() ? std::span<const FlowRange>{} : std::span<const FlowRange>(ranges).subspan(grid.branch_count());
  const auto kkt = add_kkt(model, grid, falsified_load, config.big_m_dual * m_scale, ll_ranges);
  am.redispatch = kkt.primal.redispatch;
  am.upward = kkt.primal.upward;
  am.op_angle = kkt.primal.angle;
  am.op_flow = kkt.primal.flow;
  am.bounded_duals = kkt.bounded_duals;
  am.dual_bounds = kkt.dual_bounds;

  // Physics as the attacker perceives it, with the operator's redispatch.
  for (std::size_t n = 0; n < nb; ++n) {
    const double bound = n == grid.reference_bus ? 0.0 : lp::kInfinity;
    am.angle.push_back(model.add_variable("theta_ca_" + std::to_string(n), -bound, bound));
  }
  std::vector<LinearExpr> net(nb);
  for (std::size_t g = 0; g < grid.generator_count(); ++g) {
    net[grid.generators[g].bus] += LinearExpr(grid.generators[g].base_dispatch_mw) + LinearExpr(am.redispatch[g]);
  }
  for (std::size_t l = 0; l < nl; ++l) {
    const auto& br = grid.branches[l];
    am.flow.push_back(model.add_free("f_ca_" + std::to_string(l)));
    net[br.from].add(am.flow[l], -1.0);
    net[br.to].add(am.flow[l], 1.0);
    const double y = grid.susceptance_mw(l);
    LinearExpr def(am.flow[l]);
    def.add(am.angle[br.from], -y).add(am.angle[br.to], y);
    model.add_constraint("flow_ca_" + std::to_string(l), def, RowSense::Equal);
  }
  for (std::size_t n = 0; n < nb; ++n) {
    model.add_constraint("balance_ca_" + std::to_string(n), net[n], RowSense::Equal, grid.buses[n].demand_mw);
  }

  // Overload flags and magnitudes.
  LinearExpr flagged, objective;
  for (std::size_t l = 0; l < nl; ++l) {
    const std::string id = std::to_string(l);
    const double cap = grid.branches[l].capacity_mw;
    const double limit = config.rho * cap;
    const bool derived = !config.big_m_flag && !ranges.empty();
    double m = config.big_m_flag.value_or(default_flag_m(grid, l));
    double excess_cap = lp::kInfinity;
    if (derived) {
      const double reach = std::max(std::abs(ranges[l].lo), std::abs(ranges[l].hi));
      excess_cap = std::max(0.0, reach - cap) + kRangePad;
      m = reach + limit + excess_cap + 1.0;
      model.set_bounds(am.flow[l], ranges[l].lo - kRangePad, ranges[l].hi + kRangePad);
    }
    m *= m_scale;
    am.flag_m.push_back(m);
    am.flag_m_derived = derived;

    const VarId up = model.add_binary("u_pos_" + id);
    const VarId un = model.add_binary("u_neg_" + id);
    const VarId u0 = model.add_binary("u_none_" + id);
    const VarId r = model.add_variable("r_" + id, 0.0, excess_cap);
    if (derived && ranges[l].hi < limit) model.fix(up, 0.0);
    if (derived && ranges[l].lo > -limit) model.fix(un, 0.0);
    am.pos.push_back(up);
    am.neg.push_back(un);
    am.none.push_back(u0);
    am.excess.push_back(r);
    const LinearExpr f(am.flow[l]);

    model.add_constraint("flag_one_" + id, LinearExpr(up) + LinearExpr(un) + LinearExpr(u0), RowSense::Equal, 1.0);
    model.add_constraint("flag_pos_ub_" + id, f - LinearExpr(limit), RowSense::LessEqual, LinearExpr(up, m));
    model.add_constraint("flag_pos_lb_" + id, f - LinearExpr(limit), RowSense::GreaterEqual,
                         LinearExpr(up, m) - LinearExpr(m));
    model.add_constraint("flag_neg_ub_" + id, LinearExpr(-limit) - f, RowSense::LessEqual, LinearExpr(un, m));
    model.add_constraint("flag_neg_lb_" + id, LinearExpr(-limit) - f, RowSense::GreaterEqual,
                         LinearExpr(un, m) - LinearExpr(m));
    model.add_constraint("excess_none_" + id, LinearExpr(r), RowSense::LessEqual, LinearExpr(m) - LinearExpr(u0, m));
    model.add_constraint("excess_pos_lb_" + id, LinearExpr(up, m) - LinearExpr(m) + f - LinearExpr(cap),
                         RowSense::LessEqual, LinearExpr(r));
    model.add_constraint("excess_pos_ub_" + id, LinearExpr(r), RowSense::LessEqual,
                         LinearExpr(m) - LinearExpr(up, m) + f - LinearExpr(cap));
    model.add_constraint("excess_neg_lb_" + id, LinearExpr(un, m) - LinearExpr(m) - f - LinearExpr(cap),
                         RowSense::LessEqual, LinearExpr(r));
    model.add_constraint("excess_neg_ub_" + id, LinearExpr(r), RowSense::LessEqual,
                         LinearExpr(m) - LinearExpr(un, m) - f - LinearExpr(cap));

    flagged.add(up, 1.0).add(un, 1.0);
    objective.add(r, 1.0);
  }
  model.add_constraint("min_overloads", flagged, RowSense::GreaterEqual, static_cast<double>(config.min_overloads));
  model.set_objective(lp::ObjectiveSense::Maximize, objective);
  return am;
}

int as_flag(double v) { return v > 0.5 ? 1 : 0; }

AttackerSolution extract(const GridCase& grid, const AttackModel& am, const lp::SolveOutcome& out) {
  AttackerSolution s;
  s.status = AttackStatus::Found;
  for (std::size_t n = 0; n < grid.bus_count(); ++n) {
    double e = out.value(am.injection[n]);
    if (std::abs(e) < kZeroInjection) e = 0.0;
    s.injections_mw.push_back(e);
    // A flagged meter carrying no false data is not an attacked meter.
    s.meter_flags.push_back(e != 0.0 ? as_flag(out.value(am.meter[n])) : 0);
    s.perceived_angles_rad.push_back(out.value(am.angle[n]));
  }
  for (std::size_t l = 0; l < grid.branch_count(); ++l) {
    s.perceived_flows_mw.push_back(out.value(am.flow[l]));
    s.overload_pos.push_back(as_flag(out.value(am.pos[l])));
    s.overload_neg.push_back(as_flag(out.value(am.neg[l])));
    s.overload_none.push_back(as_flag(out.value(am.none[l])));
    const double r = std::max(0.0, out.value(am.excess[l]));
    s.perceived_excess_mw.push_back(r);
    s.perceived_objective += r;
  }
  auto& resp = s.embedded_response;
  resp.status = OperatorStatus::Feasible;
  for (std::size_t g = 0; g < grid.generator_count(); ++g) {
    resp.redispatch_mw.push_back(out.value(am.redispatch[g]));
    resp.upward_mw.push_back(out.value(am.upward[g]));
    resp.redispatch_cost += grid.generators[g].redispatch_cost * resp.upward_mw.back();
  }
  for (const auto v : am.op_angle) resp.angles_rad.push_back(out.value(v));
  for (const auto v : am.op_flow) resp.flows_mw.push_back(out.value(v));
  s.mip_gap = out.mip_gap;
  return s;
}

// Re-solve with every binary fixed at its rounded value: an LP whose
// continuous part is free of integrality-tolerance noise. A second LP keeps
// the overload total and pushes the bounded multipliers as low as they go, so
// the audit only sees multipliers the optimum actually needs.
lp::SolveOutcome polish(const AttackModel& am, const lp::SolveOutcome& mip, const lp::SolveSettings& settings) {
  lp::ModelHandle fixed = am.model;
  const auto& vars = fixed.variables();
  for (std::size_t j = 0; j < vars.size(); ++j) {
    if (vars[j].kind == lp::VarKind::Binary) {
      VarId v{j};
      fixed.fix(v, std::round(mip.value(v)));
    }
  }
  lp::SolveSettings lp_settings = settings;
  lp_settings.dump_lp_path.reset();
  const auto first = lp::solve(fixed, lp_settings);
  if (first.status != lp::SolveStatus::Optimal) {
    throw AttackError(AttackError::Kind::NumericFailure,
                      "attacker LP with fixed binaries ended with status " + lp::to_string(first.status));
  }

  LinearExpr total, duals;
  for (const auto r : am.excess) total.add(r, 1.0);
  for (const auto d : am.bounded_duals) duals.add(d, 1.0);
  const double keep = first.objective - 1e-7 * std::max(1.0, std::abs(first.objective));
  fixed.add_constraint("keep_objective", total, RowSense::GreaterEqual, keep);
  fixed.set_objective(lp::ObjectiveSense::Minimize, duals);
  const auto second = lp::solve(fixed, lp_settings);
  return second.status == lp::SolveStatus::Optimal ? second : first;
}

bool audit_tight(const AttackModel& am, const lp::SolveOutcome& out, const AttackerConfig& config,
                 const GridCase& grid) {
  if (!am.flag_m_derived) {
    for (std::size_t l = 0; l < am.flow.size(); ++l) {
      const double reach = std::abs(out.value(am.flow[l])) + config.rho * grid.branches[l].capacity_mw;
      if (reach >= kAuditFraction * am.flag_m[l]) return true;
    }
  }
  for (std::size_t k = 0; k < am.bounded_duals.size(); ++k) {
    if (out.value(am.bounded_duals[k]) >= kAuditFraction * am.dual_bounds[k]) return true;
  }
  return false;
}

}  // namespace

AttackModel build_single_level(const PerceivedGrid& grid, std::span<const double> demands,
                               std::span<const double> base_dispatch, const AttackerConfig& config) {
  const GridCase g = merge_identical_units(with_operating_point(grid.grid(), demands, base_dispatch)).merged;
  return build_model(g, config, relaxation_ranges(g, config, {}), 1.0);
}

AttackerSolution solve_attack(const PerceivedGrid& grid, std::span<const double> demands,
                              std::span<const double> base_dispatch, const AttackerConfig& config,
                              const lp::SolveSettings& settings) {
  const GridCase full = with_operating_point(grid.grid(), demands, base_dispatch);
  const UnitGroups units = merge_identical_units(full);
  const GridCase& g = units.merged;
  config.validate();
  const auto ranges = relaxation_ranges(g, config, settings);
  if (ranges.empty()) return AttackerSolution{};
  AttackerSolution last;
  for (int attempt = 0; attempt <= config.big_m_retries; ++attempt) {
    const double scale = std::ldexp(1.0, attempt);
    const AttackModel am = build_model(g, config, ranges, scale);
    const auto out = lp::solve(am.model, settings);
    switch (out.status) {
      case lp::SolveStatus::Optimal: break;
      case lp::SolveStatus::Infeasible: return AttackerSolution{};
      case lp::SolveStatus::TimeLimit: {
        std::optional<AttackerSolution> incumbent;
        if (out.has_solution()) {
          incumbent = extract(g, am, out);
          split_units(units, full, incumbent->embedded_response);
        }
        throw AttackError(AttackError::Kind::SolverTimeLimit, "attacker MILP hit its time limit", incumbent);
      }
      default:
        throw AttackError(AttackError::Kind::NumericFailure,
                          "attacker MILP ended with status " + lp::to_string(out.status));
    }
    const auto clean = polish(am, out, settings);
    last = extract(g, am, clean);
    split_units(units, full, last.embedded_response);
    last.mip_gap = out.mip_gap;
    last.big_m_doublings = attempt;
    if (!audit_tight(am, clean, config, g)) return last;
    last.big_m_tight = true;
  }
  return last;
}

AttackerSolution solve_attack(const PerceivedGrid& grid, const AttackerConfig& config,
                              const lp::SolveSettings& settings) {
  const auto d = grid->demands();
  const auto p0 = grid->base_dispatch();
  return solve_attack(grid, d, p0, config, settings);
}

OperatorResponse embedded_reaction(const GridCase& grid, std::span<const double> attack_mw,
                                   const AttackerConfig& config, const lp::SolveSettings& settings) {
  if (attack_mw.size() != grid.bus_count()) throw ConfigError("attack vector does not match the grid");
  const UnitGroups units = merge_identical_units(grid);
  const GridCase& g = units.merged;
  // The attacker's own model with (a, e) pinned. Without the overload quota
  // any attack is admissible, and the attacker objective then picks the KKT
  // point that suits it best, which is where a loose encoding would show.
  AttackerConfig open = config;
  open.min_overloads = 0;
  OperatorResponse r;
  const auto ranges = relaxation_ranges(g, open, settings);
  if (ranges.empty()) {
    r.status = OperatorStatus::Infeasible;
    return r;
  }
  AttackModel am = build_model(g, open, ranges, 1.0);
  for (std::size_t n = 0; n < g.bus_count(); ++n) {
    am.model.fix(am.injection[n], attack_mw[n]);
    am.model.fix(am.meter[n], attack_mw[n] != 0.0 ? 1.0 : 0.0);
  }
  const auto out = lp::solve(am.model, settings);
  if (out.status == lp::SolveStatus::Infeasible) {
    r.status = OperatorStatus::Infeasible;
    return r;
  }
  if (out.status != lp::SolveStatus::Optimal) {
    throw AttackError(AttackError::Kind::NumericFailure, "pinned attacker model ended with status " +
                                                             lp::to_string(out.status));
  }
  r = extract(g, am, out).embedded_response;
  split_units(units, grid, r);
  return r;
}

double verify_kkt(const GridCase& grid, std::span<const double> attack_mw, const OperatorResponse& embedded,
                  const lp::SolveSettings& settings) {
  const auto standalone = solve_operator_lp(grid, attack_mw, settings);
  const bool embedded_ok = embedded.status == OperatorStatus::Feasible;
  const bool standalone_ok = standalone.status == OperatorStatus::Feasible;
  if (!embedded_ok && !standalone_ok) return 0.0;
  if (embedded_ok != standalone_ok) return std::numeric_limits<double>::infinity();
  return std::abs(embedded.redispatch_cost - standalone.redispatch_cost) /
         std::max(1.0, std::abs(standalone.redispatch_cost));
}

double attack_constraint_violation(const GridCase& grid, std::span<const double> demands,
                                   std::span<const double> base_dispatch, const AttackerConfig& config,
                                   const AttackerSolution& s) {
  if (s.status != AttackStatus::Found) return 0.0;
  const GridCase g = with_operating_point(grid, demands, base_dispatch);
  double worst = 0.0;
  auto note = [&worst](double v) { worst = std::max(worst, v); };

  note(static_cast<double>(s.meters_used() - config.budget));
  note(std::abs(std::accumulate(s.injections_mw.begin(), s.injections_mw.end(), 0.0)));
  for (std::size_t n = 0; n < g.bus_count(); ++n) {
    note(std::abs(s.injections_mw[n]) - s.meter_flags[n] * config.epsilon * g.buses[n].demand_mw);
  }

  int flagged = 0;
  double total = 0.0;
  for (std::size_t l = 0; l < g.branch_count(); ++l) {
    const double f = s.perceived_flows_mw[l];
    const double cap = g.branches[l].capacity_mw;
    const double r = s.perceived_excess_mw[l];
    note(std::abs(s.overload_pos[l] + s.overload_neg[l] + s.overload_none[l] - 1.0));
    flagged += s.overload_pos[l] + s.overload_neg[l];
    if (s.overload_pos[l]) {
      note(config.rho * cap - f);
      note(std::abs(r - (f - cap)));
    } else if (s.overload_neg[l]) {
      note(f + config.rho * cap);
      note(std::abs(r - (-f - cap)));
    } else {
      note(std::abs(f) - config.rho * cap);
      note(r);
    }
    total += r;
  }
  note(static_cast<double>(config.min_overloads - flagged));
  note(std::abs(total - s.perceived_objective));

  // Perceived physics with the embedded redispatch and the true demand.
  std::vector<double> inj(g.bus_count(), 0.0);
  for (std::size_t i = 0; i < g.generator_count(); ++i) {
    inj[g.generators[i].bus] += g.generators[i].base_dispatch_mw + s.embedded_response.redispatch_mw[i];
  }
  for (std::size_t n = 0; n < g.bus_count(); ++n) inj[n] -= g.buses[n].demand_mw;
  for (double v : nodal_residuals(g, inj, s.perceived_flows_mw)) note(std::abs(v));
  const auto implied = flows_from_angles(g, s.perceived_angles_rad);
  for (std::size_t l = 0; l < g.branch_count(); ++l) note(std::abs(implied[l] - s.perceived_flows_mw[l]));
  return worst;
}

}  // namespace gridrisk
