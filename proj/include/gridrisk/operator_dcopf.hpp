#pragma once

#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "gridrisk/grid.hpp"
#include "gridrisk/solver.hpp"

namespace gridrisk {

enum class OperatorStatus { Feasible, Infeasible };

/// Grid-operator redispatch in reaction to (possibly falsified) loads.
struct OperatorResponse {
  OperatorStatus status = OperatorStatus::Feasible;
  std::vector<double> redispatch_mw;  // p*_g, relative to base dispatch
  std::vector<double> upward_mw;      // pi_g >= max(0, p*_g)
  std::vector<double> flows_mw;       // as the operator believes them
  std::vector<double> angles_rad;
  double redispatch_cost = 0.0;

  /// Net injections on the physical grid: base dispatch + redispatch - true demand.
  [[nodiscard]] std::vector<double> physical_injections(const GridCase& grid) const;
};

class OperatorError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The operator's DC-OPF against loads d + attack, on the TRUE grid.
OperatorResponse react(const TrueGrid& grid, std::span<const double> attack_mw,
                       const lp::SolveSettings& settings = {});

/// Same lower-level program on any parameter set. Used where the attacker's
/// own belief about the operator has to be evaluated.
OperatorResponse solve_operator_lp(const GridCase& grid, std::span<const double> attack_mw,
                                   const lp::SolveSettings& settings = {});

/// No redispatch: flows of the base point.
OperatorResponse zero_response(const GridCase& grid);

enum class BaseDispatchMode { Opf, CasePg };

std::string to_string(BaseDispatchMode mode);
BaseDispatchMode parse_base_dispatch_mode(const std::string& text);

/// Sets every generator's base dispatch so that total generation equals total
/// demand. `Opf` solves the cost-minimising DC-OPF (full polynomial cost) on
/// `grid`; `CasePg` keeps the case PG values and spreads any imbalance over
/// generator headroom.
GridCase resolve_base_dispatch(GridCase grid, BaseDispatchMode mode, const lp::SolveSettings& settings = {});

}  // namespace gridrisk
