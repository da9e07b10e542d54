#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace gridrisk {

struct Bus {
  int external_id = 0;
  double demand_mw = 0.0;

  bool operator==(const Bus&) const = default;
};

struct Branch {
  std::size_t from = 0;  // internal bus index
  std::size_t to = 0;
  double reactance_pu = 0.0;
  double capacity_mw = 0.0;

  bool operator==(const Branch&) const = default;
};

struct Generator {
  std::size_t bus = 0;
  double base_dispatch_mw = 0.0;
  double min_output_mw = 0.0;
  double max_output_mw = 0.0;
  double redispatch_cost = 0.0;  // linear cost coefficient, $/MWh
  double quadratic_cost = 0.0;   // only used to resolve the base dispatch

  bool operator==(const Generator&) const = default;
};

/// DC network description. Incidence is implicit: +1 at `from`, -1 at `to`.
struct GridCase {
  double base_mva = 100.0;
  std::vector<Bus> buses;
  std::vector<Branch> branches;
  std::vector<Generator> generators;
  std::size_t reference_bus = 0;

  [[nodiscard]] std::size_t bus_count() const { return buses.size(); }
  [[nodiscard]] std::size_t branch_count() const { return branches.size(); }
  [[nodiscard]] std::size_t generator_count() const { return generators.size(); }

  /// Branch susceptance in MW per radian.
  [[nodiscard]] double susceptance_mw(std::size_t branch) const {
    return base_mva / branches[branch].reactance_pu;
  }

  [[nodiscard]] std::vector<double> demands() const;
  [[nodiscard]] std::vector<double> base_dispatch() const;
  [[nodiscard]] double total_demand() const;

  /// Net base-point injection per bus: generation at p_g0 minus demand.
  [[nodiscard]] std::vector<double> base_injections() const;

  bool operator==(const GridCase&) const = default;
};

/// Where a grid's parameters come from. The attacker only ever sees a
/// perceived grid; operator reaction and physics only ever see the true grid.
enum class Provenance { True, Perceived };

template <Provenance P>
class TaggedGrid {
 public:
  static constexpr Provenance provenance = P;

  TaggedGrid() = default;
  explicit TaggedGrid(GridCase grid) : grid_(std::move(grid)) {}

  [[nodiscard]] const GridCase& grid() const { return grid_; }
  [[nodiscard]] const GridCase* operator->() const { return &grid_; }

  bool operator==(const TaggedGrid&) const = default;

 private:
  GridCase grid_;
};

using TrueGrid = TaggedGrid<Provenance::True>;
using PerceivedGrid = TaggedGrid<Provenance::Perceived>;

/// The attacker working from exact data.
inline PerceivedGrid perceive_exactly(const TrueGrid& truth) {
  return PerceivedGrid{truth.grid()};
}

}  // namespace gridrisk
