// HiGHS-backed implementation of the solver abstraction.

#include <Highs.h>

#include <algorithm>
#include <cmath>
#include <map>

#include "gridrisk/solver.hpp"

namespace gridrisk::lp {

VarId ModelHandle::add_variable(std::string name, double lower, double upper, VarKind kind) {
  variables_.push_back({std::move(name), lower, upper, kind});
  return VarId{variables_.size() - 1};
}

RowId ModelHandle::add_constraint(std::string name, const LinearExpr& lhs, RowSense sense,
                                  const LinearExpr& rhs) {
  Constraint row;
  row.name = std::move(name);
  row.sense = sense;
  row.terms = lhs.terms;
  for (const auto& t : rhs.terms) row.terms.push_back({t.var, -t.coef});
  row.rhs = rhs.constant - lhs.constant;
  constraints_.push_back(std::move(row));
  return RowId{constraints_.size() - 1};
}

void ModelHandle::set_objective(ObjectiveSense sense, const LinearExpr& expr) {
  objective_.sense = sense;
  objective_.terms = expr.terms;
  objective_.constant = expr.constant;
}

void ModelHandle::add_square(VarId v, double coef) { objective_.squares.push_back({v, coef}); }

void ModelHandle::set_bounds(VarId v, double lower, double upper) {
  variables_.at(v.index).lower = lower;
  variables_.at(v.index).upper = upper;
}

bool ModelHandle::has_integers() const { return binary_count() > 0; }

std::size_t ModelHandle::binary_count() const {
  return static_cast<std::size_t>(std::count_if(variables_.begin(), variables_.end(), [](const Variable& v) {
    return v.kind == VarKind::Binary;
  }));
}

void ModelHandle::validate() const {
  auto fail = [](const std::string& what) {
    throw SolverError(SolverError::Kind::ModelTranslationError, what);
  };
  const std::size_t n = variables_.size();
  for (const auto& v : variables_) {
    if (v.lower > v.upper) fail("variable '" + v.name + "' has lower bound above upper bound");
    if (v.kind == VarKind::Binary && (v.lower < 0.0 || v.upper > 1.0)) {
      fail("binary variable '" + v.name + "' has bounds outside [0,1]");
    }
  }
  for (const auto& c : constraints_) {
    for (const auto& t : c.terms) {
      if (t.var.index >= n) fail("constraint '" + c.name + "' references an undeclared variable");
      if (!std::isfinite(t.coef)) fail("constraint '" + c.name + "' has a non-finite coefficient");
    }
    if (!std::isfinite(c.rhs)) fail("constraint '" + c.name + "' has a non-finite right-hand side");
  }
  for (const auto& t : objective_.terms) {
    if (t.var.index >= n) fail("objective references an undeclared variable");
  }
  for (const auto& t : objective_.squares) {
    if (t.var.index >= n) fail("objective references an undeclared variable");
    if (t.coef < 0.0 || objective_.sense != ObjectiveSense::Minimize) {
      fail("quadratic objective terms must be convex and minimised");
    }
  }
}

std::string to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::Optimal: return "Optimal";
    case SolveStatus::Infeasible: return "Infeasible";
    case SolveStatus::Unbounded: return "Unbounded";
    case SolveStatus::TimeLimit: return "TimeLimit";
    case SolveStatus::NumericFailure: return "NumericFailure";
  }
  return "NumericFailure";
}

namespace {

double clamp_infinity(double x) {
  if (x >= kInfinity) return kHighsInf;
  if (x <= -kInfinity) return -kHighsInf;
  return x;
}

double unclamp_infinity(double x) {
  if (x >= kHighsInf) return kInfinity;
  if (x <= -kHighsInf) return -kInfinity;
  return x;
}

HighsModel translate(const ModelHandle& model) {
  model.validate();
  const auto& vars = model.variables();
  const auto& rows = model.constraints();

  HighsModel hm;
  HighsLp& lp = hm.lp_;
  lp.num_col_ = static_cast<HighsInt>(vars.size());
  lp.num_row_ = static_cast<HighsInt>(rows.size());
  lp.sense_ = model.objective().sense == ObjectiveSense::Minimize ? ObjSense::kMinimize : ObjSense::kMaximize;
  lp.offset_ = model.objective().constant;
  lp.col_cost_.assign(vars.size(), 0.0);
  for (const auto& t : model.objective().terms) lp.col_cost_[t.var.index] += t.coef;

  bool any_integer = false;
  for (const auto& v : vars) {
    lp.col_lower_.push_back(clamp_infinity(v.lower));
    lp.col_upper_.push_back(clamp_infinity(v.upper));
    lp.col_names_.push_back(v.name);
    const bool integer = v.kind == VarKind::Binary;
    lp.integrality_.push_back(integer ? HighsVarType::kInteger : HighsVarType::kContinuous);
    any_integer = any_integer || integer;
  }
  if (!any_integer) lp.integrality_.clear();

  // Column-wise matrix with duplicate entries merged.
  std::vector<std::map<HighsInt, double>> columns(vars.size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const auto& c = rows[r];
    for (const auto& t : c.terms) columns[t.var.index][static_cast<HighsInt>(r)] += t.coef;
    switch (c.sense) {
      case RowSense::LessEqual:
        lp.row_lower_.push_back(-kHighsInf);
        lp.row_upper_.push_back(c.rhs);
        break;
      case RowSense::Equal:
        lp.row_lower_.push_back(c.rhs);
        lp.row_upper_.push_back(c.rhs);
        break;
      case RowSense::GreaterEqual:
        lp.row_lower_.push_back(c.rhs);
        lp.row_upper_.push_back(kHighsInf);
        break;
    }
    lp.row_names_.push_back(c.name);
  }
  auto& a = lp.a_matrix_;
  a.format_ = MatrixFormat::kColwise;
  a.num_col_ = lp.num_col_;
  a.num_row_ = lp.num_row_;
  a.start_.assign(1, 0);
  for (const auto& col : columns) {
    for (const auto& [row, value] : col) {
      if (value == 0.0) continue;
      a.index_.push_back(row);
      a.value_.push_back(value);
    }
    a.start_.push_back(static_cast<HighsInt>(a.index_.size()));
  }

  if (!model.objective().squares.empty()) {
    std::map<HighsInt, double> diag;
    for (const auto& t : model.objective().squares) diag[static_cast<HighsInt>(t.var.index)] += 2.0 * t.coef;
    auto& h = hm.hessian_;
    h.dim_ = lp.num_col_;
    h.format_ = HessianFormat::kTriangular;
    h.start_.assign(1, 0);
    for (HighsInt j = 0; j < lp.num_col_; ++j) {
      auto it = diag.find(j);
      if (it != diag.end() && it->second != 0.0) {
        h.index_.push_back(j);
        h.value_.push_back(it->second);
      }
      h.start_.push_back(static_cast<HighsInt>(h.index_.size()));
    }
  }
  return hm;
}

void configure(Highs& highs, const SolveSettings& settings) {
  highs.setOptionValue("output_flag", false);
  highs.setOptionValue("time_limit", settings.time_limit_s);
  highs.setOptionValue("mip_rel_gap", settings.mip_rel_gap);
  highs.setOptionValue("random_seed", settings.seed);
  if (!settings.presolve) highs.setOptionValue("presolve", "off");
  if (settings.deterministic) {
    highs.setOptionValue("threads", 1);
    highs.setOptionValue("parallel", "off");
  }
}

SolveStatus map_status(HighsModelStatus s) {
  switch (s) {
    case HighsModelStatus::kOptimal: return SolveStatus::Optimal;
    case HighsModelStatus::kInfeasible: return SolveStatus::Infeasible;
    case HighsModelStatus::kUnbounded: return SolveStatus::Unbounded;
    case HighsModelStatus::kTimeLimit: return SolveStatus::TimeLimit;
    default: return SolveStatus::NumericFailure;
  }
}

void pass(Highs& highs, HighsModel hm) {
  const HighsStatus st = highs.passModel(std::move(hm));
  if (st == HighsStatus::kError) {
    throw SolverError(SolverError::Kind::ModelTranslationError, "backend rejected the model");
  }
}

}  // namespace

SolveOutcome solve(const ModelHandle& model, const SolveSettings& settings) {
  HighsModel hm = translate(model);
  const bool is_mip = model.has_integers();

  Highs highs;
  configure(highs, settings);
  pass(highs, hm);
  if (settings.dump_lp_path) highs.writeModel(*settings.dump_lp_path);

  highs.run();
  HighsModelStatus ms = highs.getModelStatus();
  if (ms == HighsModelStatus::kUnboundedOrInfeasible) {
    // Presolve cannot tell the two apart; the unpresolved solve can.
    highs.clearSolver();
    highs.setOptionValue("presolve", "off");
    highs.run();
    ms = highs.getModelStatus();
    if (ms == HighsModelStatus::kUnboundedOrInfeasible) ms = HighsModelStatus::kInfeasible;
  }

  SolveOutcome out;
  out.status = map_status(ms);
  const HighsInfo& info = highs.getInfo();
  const bool has_primal = info.primal_solution_status == kSolutionStatusFeasible;
  if (out.status == SolveStatus::Optimal || (out.status == SolveStatus::TimeLimit && has_primal)) {
    const HighsSolution& sol = highs.getSolution();
    out.primal = sol.col_value;
    out.objective = info.objective_function_value;
    if (is_mip) {
      out.mip_gap = info.mip_gap;
    } else if (sol.dual_valid) {
      out.duals = sol.row_dual;
      out.reduced_costs = sol.col_dual;
    }
  }
  return out;
}

std::vector<SolveOutcome> solve_each(const ModelHandle& model, const std::vector<Objective>& objectives,
                                     const SolveSettings& settings) {
  if (model.has_integers()) {
    throw SolverError(SolverError::Kind::ModelTranslationError, "solve_each accepts pure LP models only");
  }
  Highs highs;
  configure(highs, settings);
  pass(highs, translate(model));

  const auto n = static_cast<HighsInt>(model.variables().size());
  std::vector<HighsInt> all(static_cast<std::size_t>(n));
  for (HighsInt j = 0; j < n; ++j) all[static_cast<std::size_t>(j)] = j;

  std::vector<SolveOutcome> results;
  results.reserve(objectives.size());
  for (const auto& objective : objectives) {
    if (!objective.squares.empty()) {
      throw SolverError(SolverError::Kind::ModelTranslationError, "solve_each accepts linear objectives only");
    }
    std::vector<double> cost(static_cast<std::size_t>(n), 0.0);
    for (const auto& t : objective.terms) {
      if (t.var.index >= cost.size()) {
        throw SolverError(SolverError::Kind::ModelTranslationError, "objective references an undeclared variable");
      }
      cost[t.var.index] += t.coef;
    }
    highs.changeColsCost(n, all.data(), cost.data());
    highs.changeObjectiveOffset(objective.constant);
    highs.changeObjectiveSense(objective.sense == ObjectiveSense::Minimize ? ObjSense::kMinimize
                                                                           : ObjSense::kMaximize);
    highs.run();

    SolveOutcome out;
    out.status = map_status(highs.getModelStatus());
    if (highs.getModelStatus() == HighsModelStatus::kUnboundedOrInfeasible) out.status = SolveStatus::Infeasible;
    if (out.status == SolveStatus::Optimal) {
      const HighsSolution& sol = highs.getSolution();
      out.primal = sol.col_value;
      out.objective = highs.getInfo().objective_function_value;
      if (sol.dual_valid) {
        out.duals = sol.row_dual;
        out.reduced_costs = sol.col_dual;
      }
    }
    results.push_back(std::move(out));
  }
  return results;
}

void write_lp(const ModelHandle& model, const std::string& path) {
  Highs highs;
  highs.setOptionValue("output_flag", false);
  pass(highs, translate(model));
  if (highs.writeModel(path) == HighsStatus::kError) {
    throw SolverError(SolverError::Kind::ModelTranslationError, "cannot write LP file '" + path + "'");
  }
}

ModelHandle read_lp(const std::string& path) {
  Highs highs;
  highs.setOptionValue("output_flag", false);
  if (highs.readModel(path) == HighsStatus::kError) {
    throw SolverError(SolverError::Kind::ModelTranslationError, "cannot read LP file '" + path + "'");
  }
  const HighsModel& hm = highs.getModel();
  HighsLp lp = hm.lp_;
  lp.a_matrix_.ensureColwise();

  ModelHandle model;
  for (HighsInt j = 0; j < lp.num_col_; ++j) {
    const bool integer = !lp.integrality_.empty() && lp.integrality_[j] == HighsVarType::kInteger;
    std::string name = j < static_cast<HighsInt>(lp.col_names_.size()) ? lp.col_names_[j] : "c" + std::to_string(j);
    model.add_variable(std::move(name), unclamp_infinity(lp.col_lower_[j]), unclamp_infinity(lp.col_upper_[j]),
                       integer ? VarKind::Binary : VarKind::Continuous);
  }

  std::vector<LinearExpr> rows(static_cast<std::size_t>(lp.num_row_));
  for (HighsInt j = 0; j < lp.num_col_; ++j) {
    for (HighsInt k = lp.a_matrix_.start_[j]; k < lp.a_matrix_.start_[j + 1]; ++k) {
      rows[static_cast<std::size_t>(lp.a_matrix_.index_[k])].add(VarId{static_cast<std::size_t>(j)},
                                                                lp.a_matrix_.value_[k]);
    }
  }
  for (HighsInt i = 0; i < lp.num_row_; ++i) {
    std::string name = i < static_cast<HighsInt>(lp.row_names_.size()) ? lp.row_names_[i] : "r" + std::to_string(i);
    const double lo = lp.row_lower_[i];
    const double hi = lp.row_upper_[i];
    const auto& expr = rows[static_cast<std::size_t>(i)];
    if (lo == hi) {
      model.add_constraint(name, expr, RowSense::Equal, lo);
    } else {
      if (lo > -kHighsInf) model.add_constraint(name, expr, RowSense::GreaterEqual, lo);
      if (hi < kHighsInf) model.add_constraint(name + (lo > -kHighsInf ? "_ub" : ""), expr, RowSense::LessEqual, hi);
    }
  }

  LinearExpr obj(lp.offset_);
  for (HighsInt j = 0; j < lp.num_col_; ++j) obj.add(VarId{static_cast<std::size_t>(j)}, lp.col_cost_[j]);
  model.set_objective(lp.sense_ == ObjSense::kMinimize ? ObjectiveSense::Minimize : ObjectiveSense::Maximize, obj);
  const auto& h = hm.hessian_;
  for (HighsInt j = 0; j < h.dim_; ++j) {
    for (HighsInt k = h.start_[j]; k < h.start_[j + 1]; ++k) {
      if (h.index_[k] != j) {
        throw SolverError(SolverError::Kind::ModelTranslationError, "only diagonal quadratic terms are supported");
      }
      model.add_square(VarId{static_cast<std::size_t>(j)}, 0.5 * h.value_[k]);
    }
  }
  return model;
}

}  // namespace gridrisk::lp
