#include "gridrisk/grid_core.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <numeric>
#include <sstream>

#include "gridrisk/case_parser.hpp"

namespace gridrisk {

FlowState solve_dc_flow(const GridCase& grid, std::span<const double> injections_mw,
                        std::size_t reference_bus) {
  const std::size_t n = grid.bus_count();
  if (injections_mw.size() != n || reference_bus >= n) {
    throw FlowError(FlowError::Kind::SizeMismatch, "injection vector or reference bus does not match grid");
  }
  const double residual = std::accumulate(injections_mw.begin(), injections_mw.end(), 0.0);
  if (std::abs(residual) > kBalanceTolerance) {
    std::ostringstream msg;
    msg << "injections are unbalanced by " << residual << " MW";
    throw FlowError(FlowError::Kind::UnbalancedInjections, msg.str(), residual);
  }
  try {
    require_connected(grid);
  } catch (const CaseError& e) {
    throw FlowError(FlowError::Kind::SingularSystem, e.what());
  }

  // Reduced index: every bus but the reference.
  auto reduced = [reference_bus](std::size_t bus) { return bus < reference_bus ? bus : bus - 1; };
  const auto m = static_cast<Eigen::Index>(n - 1);
  Eigen::MatrixXd b = Eigen::MatrixXd::Zero(m, m);
  Eigen::VectorXd p(m);
  for (std::size_t k = 0; k < n; ++k) {
    if (k != reference_bus) p(static_cast<Eigen::Index>(reduced(k))) = injections_mw[k];
  }
  for (std::size_t l = 0; l < grid.branch_count(); ++l) {
    const auto& br = grid.branches[l];
    const double y = grid.susceptance_mw(l);
    const bool from_free = br.from != reference_bus;
    const bool to_free = br.to != reference_bus;
    const auto i = static_cast<Eigen::Index>(from_free ? reduced(br.from) : 0);
    const auto j = static_cast<Eigen::Index>(to_free ? reduced(br.to) : 0);
    if (from_free) b(i, i) += y;
    if (to_free) b(j, j) += y;
    if (from_free && to_free) {
      b(i, j) -= y;
      b(j, i) -= y;
    }
  }

  FlowState state;
  state.reference_bus = reference_bus;
  state.angles_rad.assign(n, 0.0);
  if (m > 0) {
    Eigen::LLT<Eigen::MatrixXd> llt(b);
    if (llt.info() != Eigen::Success) {
      throw FlowError(FlowError::Kind::SingularSystem, "reduced susceptance matrix is not positive definite");
    }
    const Eigen::VectorXd theta = llt.solve(p);
    for (std::size_t k = 0; k < n; ++k) {
      if (k != reference_bus) state.angles_rad[k] = theta(static_cast<Eigen::Index>(reduced(k)));
    }
  }
  state.flows_mw = flows_from_angles(grid, state.angles_rad);
  return state;
}

std::vector<double> flows_from_angles(const GridCase& grid, std::span<const double> angles_rad) {
  std::vector<double> flows(grid.branch_count());
  for (std::size_t l = 0; l < flows.size(); ++l) {
    const auto& br = grid.branches[l];
    flows[l] = grid.susceptance_mw(l) * (angles_rad[br.from] - angles_rad[br.to]);
  }
  return flows;
}

std::vector<double> nodal_residuals(const GridCase& grid, std::span<const double> injections_mw,
                                    std::span<const double> flows_mw) {
  std::vector<double> r(injections_mw.begin(), injections_mw.end());
  for (std::size_t l = 0; l < grid.branch_count(); ++l) {
    r[grid.branches[l].from] -= flows_mw[l];
    r[grid.branches[l].to] += flows_mw[l];
  }
  return r;
}

ImpactReport measure_impact(const GridCase& grid, const FlowState& flows,
                            std::span<const double> thresholds) {
  ImpactReport report;
  for (std::size_t l = 0; l < grid.branch_count(); ++l) {
    const double f = flows.flows_mw[l];
    const double cap = grid.branches[l].capacity_mw;
    const double magnitude = std::abs(f);
    if (magnitude <= cap) continue;

    Overload o{l, f >= 0.0 ? FlowDirection::Positive : FlowDirection::Negative, magnitude / cap,
               magnitude - cap};
    if (magnitude >= thresholds[l] * cap) {
      report.total_impact += o.excess_mw;
      report.measurable_impact += magnitude - thresholds[l] * cap;
      report.overloaded.push_back(o);
    } else {
      report.sub_threshold_overloads.push_back(o);
    }
  }
  report.count_above_threshold = report.overloaded.size();
  return report;
}

std::vector<double> uniform_thresholds(const GridCase& grid, double rho) {
  return std::vector<double>(grid.branch_count(), rho);
}

}  // namespace gridrisk
