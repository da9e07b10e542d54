#pragma once

// Primal block of the operator's redispatch LP, shared by the standalone
// reaction model and the attacker's single-level reformulation.

#include <vector>

#include "gridrisk/grid.hpp"
#include "gridrisk/solver.hpp"

namespace gridrisk::detail {

struct LowerLevelBlock {
  std::vector<lp::VarId> redispatch;  // p*_g in [p_min - p_g0, p_max - p_g0]
  std::vector<lp::VarId> upward;      // pi_g >= 0
  std::vector<lp::VarId> angle;       // theta_n, reference fixed to 0
  std::vector<lp::VarId> flow;        // f_l in [-cap, cap]
  std::vector<lp::RowId> cost_link;   // pi_g - p*_g >= 0
  std::vector<lp::RowId> balance;     // per bus
  std::vector<lp::RowId> flow_def;    // per branch

  [[nodiscard]] double redispatch_lower(const GridCase& grid, std::size_t g) const {
    return grid.generators[g].min_output_mw - grid.generators[g].base_dispatch_mw;
  }
  [[nodiscard]] double redispatch_upper(const GridCase& grid, std::size_t g) const {
    return grid.generators[g].max_output_mw - grid.generators[g].base_dispatch_mw;
  }
};

/// Adds variables and rows; `falsified_load[n]` is the load the operator sees
/// at bus n (d_n + e_n, constant or an expression in attack variables).
/// `upward_cap`, when set, bounds pi_g by max(0, p_max - p_g0).
LowerLevelBlock add_lower_level(lp::ModelHandle& model, const GridCase& grid,
                                const std::vector<lp::LinearExpr>& falsified_load, const std::string& prefix,
                                bool upward_cap);

/// sum_g c_g pi_g
lp::LinearExpr lower_level_cost(const GridCase& grid, const LowerLevelBlock& block);

}  // namespace gridrisk::detail
