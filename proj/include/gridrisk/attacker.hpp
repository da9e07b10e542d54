#pragma once

#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "gridrisk/grid.hpp"
#include "gridrisk/operator_dcopf.hpp"
#include "gridrisk/solver.hpp"

namespace gridrisk {

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Attacker resources and intent.
struct AttackerConfig {
  int min_overloads = 2;         // U
  int budget = 10;               // A, number of load meters
  double epsilon = 0.20;         // max relative falsification per meter
  double rho = 1.05;             // overload threshold as a ratio of capacity
  /// Flag big-M. When unset each branch gets one from the range of its
  /// perceived flow over the LP relaxation (2 * total demand + capacity if
  /// that range is unavailable).
  std::optional<double> big_m_flag;
  /// Bound on lower-level multipliers whose magnitude has no closed form.
  double big_m_dual = 1e4;
  /// Number of times the big-M values may be doubled after a tight audit.
  int big_m_retries = 3;

  void validate() const;
};

enum class AttackStatus { Found, NoFeasibleAttack };

struct AttackerSolution {
  AttackStatus status = AttackStatus::NoFeasibleAttack;
  std::vector<int> meter_flags;        // a_n
  std::vector<double> injections_mw;   // e_n
  std::vector<double> perceived_flows_mw;
  std::vector<double> perceived_angles_rad;
  std::vector<int> overload_pos;       // u+
  std::vector<int> overload_neg;       // u-
  std::vector<int> overload_none;      // u0
  std::vector<double> perceived_excess_mw;  // r_l
  double perceived_objective = 0.0;
  OperatorResponse embedded_response;  // the operator as the attacker models it
  bool big_m_tight = false;            // audit still tight after all retries
  int big_m_doublings = 0;
  double mip_gap = 0.0;

  [[nodiscard]] int meters_used() const;
};

class AttackError : public std::runtime_error {
 public:
  enum class Kind { SolverTimeLimit, NumericFailure };

  AttackError(Kind kind, const std::string& what, std::optional<AttackerSolution> incumbent = std::nullopt)
      : std::runtime_error(what), kind_(kind), incumbent_(std::move(incumbent)) {}

  [[nodiscard]] Kind kind() const { return kind_; }
  [[nodiscard]] const std::optional<AttackerSolution>& incumbent() const { return incumbent_; }

 private:
  Kind kind_;
  std::optional<AttackerSolution> incumbent_;
};

/// Variable handles of a built single-level model.
struct AttackModel {
  lp::ModelHandle model;
  std::vector<lp::VarId> meter, injection, angle, flow, pos, neg, none, excess;
  std::vector<lp::VarId> redispatch, upward, op_angle, op_flow;
  /// Multipliers and their big-M bounds, for the tightness audit.
  std::vector<lp::VarId> bounded_duals;
  std::vector<double> dual_bounds;
  std::vector<double> flag_m;
  /// Flag big-Ms come from perceived-flow ranges and are valid by construction.
  bool flag_m_derived = false;
};

/// Upper-level constraints plus the KKT system of the operator's LP with
/// big-M complementarity, as one MILP maximising total perceived overload.
/// `demands` and `base_dispatch` override those stored in `grid`.
AttackModel build_single_level(const PerceivedGrid& grid, std::span<const double> demands,
                               std::span<const double> base_dispatch, const AttackerConfig& config);

AttackerSolution solve_attack(const PerceivedGrid& grid, std::span<const double> demands,
                              std::span<const double> base_dispatch, const AttackerConfig& config,
                              const lp::SolveSettings& settings = {});

/// Uses the demand and base dispatch stored in the grid.
AttackerSolution solve_attack(const PerceivedGrid& grid, const AttackerConfig& config,
                              const lp::SolveSettings& settings = {});

/// The operator's reaction as the attacker MILP encodes it, with (a, e) fixed
/// to `attack_mw` and no overload quota. Infeasible status when that model
/// has no solution.
OperatorResponse embedded_reaction(const GridCase& grid, std::span<const double> attack_mw,
                                   const AttackerConfig& config, const lp::SolveSettings& settings = {});

/// Relative gap between the embedded and standalone lower-level optima:
/// |embedded - standalone| / max(1, standalone). Zero when both are infeasible.
double verify_kkt(const GridCase& grid, std::span<const double> attack_mw, const OperatorResponse& embedded,
                  const lp::SolveSettings& settings = {});

/// Largest violation (MW) of the attacker constraints, re-checked outside the
/// solver: budget, balance, per-meter bounds, flags, excess, perceived physics.
double attack_constraint_violation(const GridCase& grid, std::span<const double> demands,
                                   std::span<const double> base_dispatch, const AttackerConfig& config,
                                   const AttackerSolution& solution);

}  // namespace gridrisk
