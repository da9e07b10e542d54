#pragma once

#include <string>

#include "gridrisk/grid.hpp"

namespace gridrisk::test {

inline std::string rts_case() { return GRIDRISK_CASE_FILE; }
inline std::string fixture(const std::string& name) { return std::string(GRIDRISK_FIXTURE_DIR) + "/" + name; }

inline Generator unit(std::size_t bus, double cost, double pmin, double pmax, double p0) {
  Generator g;
  g.bus = bus;
  g.redispatch_cost = cost;
  g.min_output_mw = pmin;
  g.max_output_mw = pmax;
  g.base_dispatch_mw = p0;
  return g;
}

// Two buses joined by one 80 MW line; 100 MW load at bus 1.
inline GridCase two_bus() {
  GridCase g;
  g.buses = {{1, 0.0}, {2, 100.0}};
  g.branches = {{0, 1, 0.1, 80.0}};
  g.generators = {unit(0, 10.0, 0.0, 200.0, 100.0), unit(1, 50.0, 0.0, 100.0, 0.0)};
  g.reference_bus = 0;
  return g;
}

// Triangle with equal reactances. Branches 0-1, 0-2, 1-2.
inline GridCase three_bus_ring() {
  GridCase g;
  g.buses = {{1, 0.0}, {2, 150.0}, {3, 90.0}};
  g.branches = {{0, 1, 0.1, 120.0}, {0, 2, 0.1, 120.0}, {1, 2, 0.1, 40.0}};
  g.generators = {unit(0, 10.0, 0.0, 400.0, 240.0), unit(1, 40.0, 0.0, 100.0, 0.0), unit(2, 25.0, 0.0, 100.0, 0.0)};
  g.reference_bus = 0;
  return g;
}

}  // namespace gridrisk::test
