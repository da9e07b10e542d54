#pragma once

#include <istream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "gridrisk/grid.hpp"

namespace gridrisk {

class CaseError : public std::runtime_error {
 public:
  enum class Kind {
    MissingTable,
    MalformedRow,
    NonNumericToken,
    InvalidScale,
    NonPositiveReactance,
    NonPositiveCapacity,
    InvalidGenerator,
    DisconnectedGraph,
    Unreadable,
  };

  CaseError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}

  [[nodiscard]] Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

using NumericTable = std::vector<std::vector<double>>;

/// The four MATPOWER tables exactly as read, before any interpretation.
struct RawCaseTables {
  double base_mva = 0.0;
  NumericTable bus;
  NumericTable gen;
  NumericTable branch;
  NumericTable gencost;
};

// Minimum column counts of the MATPOWER version 2 format.
inline constexpr std::size_t kBusColumns = 13;
inline constexpr std::size_t kGenColumns = 21;
inline constexpr std::size_t kBranchColumns = 13;
inline constexpr std::size_t kGencostColumns = 4;

/// Reads `mpc.baseMVA`, `mpc.bus`, `mpc.gen`, `mpc.branch` and `mpc.gencost`
/// from MATPOWER case text. Other `mpc.*` fields are ignored.
RawCaseTables parse_case(std::string_view text);
RawCaseTables parse_case(std::istream& in);
RawCaseTables parse_case_file(const std::string& path);

/// Interprets the tables as a DC network. Branch ratings are multiplied by
/// `capacity_scale`; out-of-service branches and generators are dropped.
/// Generator base dispatch is taken from the PG column; see
/// `resolve_base_dispatch` for balancing it.
GridCase build_grid(const RawCaseTables& tables, double capacity_scale);

/// Throws CaseError(DisconnectedGraph) unless every bus is reachable.
void require_connected(const GridCase& grid);

}  // namespace gridrisk
