#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace gridrisk::lp {

enum class VarKind { Continuous, Binary };
enum class RowSense { LessEqual, Equal, GreaterEqual };
enum class ObjectiveSense { Minimize, Maximize };

inline constexpr double kInfinity = 1e30;

struct VarId {
  std::size_t index = 0;
  bool operator==(const VarId&) const = default;
};

struct RowId {
  std::size_t index = 0;
  bool operator==(const RowId&) const = default;
};

struct Term {
  VarId var;
  double coef = 0.0;
};

/// A linear expression sum(coef * var) + constant.
struct LinearExpr {
  std::vector<Term> terms;
  double constant = 0.0;

  LinearExpr() = default;
  LinearExpr(double c) : constant(c) {}  // NOLINT(google-explicit-constructor)
  LinearExpr(VarId v, double coef = 1.0) : terms{{v, coef}} {}  // NOLINT(google-explicit-constructor)

  LinearExpr& add(VarId v, double coef) {
    if (coef != 0.0) terms.push_back({v, coef});
    return *this;
  }
  LinearExpr& operator+=(const LinearExpr& other) {
    terms.insert(terms.end(), other.terms.begin(), other.terms.end());
    constant += other.constant;
    return *this;
  }
  LinearExpr& operator-=(const LinearExpr& other) {
    for (const auto& t : other.terms) terms.push_back({t.var, -t.coef});
    constant -= other.constant;
    return *this;
  }
  LinearExpr& operator*=(double k) {
    for (auto& t : terms) t.coef *= k;
    constant *= k;
    return *this;
  }
};

inline LinearExpr operator+(LinearExpr a, const LinearExpr& b) { return a += b; }
inline LinearExpr operator-(LinearExpr a, const LinearExpr& b) { return a -= b; }
inline LinearExpr operator*(double k, LinearExpr a) { return a *= k; }

struct Variable {
  std::string name;
  double lower = 0.0;
  double upper = kInfinity;
  VarKind kind = VarKind::Continuous;
};

struct Constraint {
  std::string name;
  std::vector<Term> terms;
  RowSense sense = RowSense::LessEqual;
  double rhs = 0.0;
};

struct Objective {
  ObjectiveSense sense = ObjectiveSense::Minimize;
  std::vector<Term> terms;
  double constant = 0.0;
  /// coef * x^2 terms; minimisation only, coef >= 0.
  std::vector<Term> squares;
};

class SolverError : public std::runtime_error {
 public:
  enum class Kind { BackendUnavailable, ModelTranslationError };

  SolverError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  [[nodiscard]] Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

/// Solver-independent linear / mixed-binary model.
class ModelHandle {
 public:
  VarId add_variable(std::string name, double lower, double upper, VarKind kind = VarKind::Continuous);
  VarId add_binary(std::string name) { return add_variable(std::move(name), 0.0, 1.0, VarKind::Binary); }
  VarId add_free(std::string name) { return add_variable(std::move(name), -kInfinity, kInfinity); }

  /// Adds `lhs (sense) rhs`; constants on either side are folded into the row bound.
  RowId add_constraint(std::string name, const LinearExpr& lhs, RowSense sense, const LinearExpr& rhs = {});

  void set_objective(ObjectiveSense sense, const LinearExpr& expr);
  void add_square(VarId v, double coef);

  void set_bounds(VarId v, double lower, double upper);
  void fix(VarId v, double value) { set_bounds(v, value, value); }

  [[nodiscard]] const std::vector<Variable>& variables() const { return variables_; }
  [[nodiscard]] const std::vector<Constraint>& constraints() const { return constraints_; }
  [[nodiscard]] const Objective& objective() const { return objective_; }
  [[nodiscard]] bool has_integers() const;
  [[nodiscard]] std::size_t binary_count() const;

  /// Throws SolverError(ModelTranslationError) when an invariant is broken.
  void validate() const;

 private:
  std::vector<Variable> variables_;
  std::vector<Constraint> constraints_;
  Objective objective_;
};

struct SolveSettings {
  double time_limit_s = 60.0;
  double mip_rel_gap = 1e-9;
  bool deterministic = true;
  int seed = 0;
  bool presolve = true;
  /// When set, the model is written to this path in LP format before solving.
  std::optional<std::string> dump_lp_path;
};

enum class SolveStatus { Optimal, Infeasible, Unbounded, TimeLimit, NumericFailure };

std::string to_string(SolveStatus status);

struct SolveOutcome {
  SolveStatus status = SolveStatus::NumericFailure;
  double objective = 0.0;
  std::vector<double> primal;          // indexed by VarId
  std::vector<double> duals;           // indexed by RowId; LP only
  std::vector<double> reduced_costs;   // indexed by VarId; LP only
  double mip_gap = 0.0;

  [[nodiscard]] bool has_solution() const { return !primal.empty(); }
  [[nodiscard]] double value(VarId v) const { return primal[v.index]; }
  [[nodiscard]] double dual(RowId r) const { return duals[r.index]; }
};

SolveOutcome solve(const ModelHandle& model, const SolveSettings& settings = {});

/// Solves a pure LP once per objective in turn, each solve warm-started from
/// the previous basis. The model's own objective is ignored.
std::vector<SolveOutcome> solve_each(const ModelHandle& model, const std::vector<Objective>& objectives,
                                     const SolveSettings& settings = {});

/// LP-format text round trip (CPLEX LP dialect as read and written by the backend).
void write_lp(const ModelHandle& model, const std::string& path);
ModelHandle read_lp(const std::string& path);

}  // namespace gridrisk::lp
