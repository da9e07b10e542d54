#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "gridrisk/grid.hpp"

namespace gridrisk {

class FlowError : public std::runtime_error {
 public:
  enum class Kind { UnbalancedInjections, SingularSystem, SizeMismatch };

  FlowError(Kind kind, const std::string& what, double residual = 0.0)
      : std::runtime_error(what), kind_(kind), residual_(residual) {}

  [[nodiscard]] Kind kind() const { return kind_; }
  [[nodiscard]] double residual() const { return residual_; }

 private:
  Kind kind_;
  double residual_;
};

/// Bus voltage angles and branch flows of one DC power-flow solution.
struct FlowState {
  std::vector<double> angles_rad;
  std::vector<double> flows_mw;
  std::size_t reference_bus = 0;
};

inline constexpr double kBalanceTolerance = 1e-6;  // MW

/// Solves B' theta = P on the reduced nodal susceptance system.
/// Injections are in MW and must sum to zero within `kBalanceTolerance`.
FlowState solve_dc_flow(const GridCase& grid, std::span<const double> injections_mw,
                        std::size_t reference_bus);

/// Branch flows implied by a set of angles (MW).
std::vector<double> flows_from_angles(const GridCase& grid, std::span<const double> angles_rad);

/// Per-bus residual of generation - outflow - demand, for any flow vector.
std::vector<double> nodal_residuals(const GridCase& grid, std::span<const double> injections_mw,
                                    std::span<const double> flows_mw);

enum class FlowDirection { Positive, Negative };

struct Overload {
  std::size_t branch = 0;
  FlowDirection direction = FlowDirection::Positive;
  double loading_ratio = 0.0;  // |f| / capacity
  double excess_mw = 0.0;      // |f| - capacity
};

struct ImpactReport {
  /// Branches with |f| >= rho * capacity.
  std::vector<Overload> overloaded;
  /// Branches with capacity < |f| < rho * capacity; diagnostic only.
  std::vector<Overload> sub_threshold_overloads;
  std::size_t count_above_threshold = 0;
  /// Sum of |f| - capacity over `overloaded`.
  double total_impact = 0.0;
  /// Sum of |f| - rho * capacity over `overloaded`: the overload measured
  /// beyond the threshold itself.
  double measurable_impact = 0.0;
};

ImpactReport measure_impact(const GridCase& grid, const FlowState& flows,
                            std::span<const double> thresholds);

/// Same threshold for every branch.
std::vector<double> uniform_thresholds(const GridCase& grid, double rho);

}  // namespace gridrisk
