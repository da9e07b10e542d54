#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "gridrisk/grid.hpp"

namespace gridrisk {

enum class ErrorTarget { Admittance, Capacity };

std::string to_string(ErrorTarget target);
ErrorTarget parse_error_target(const std::string& text);

inline constexpr std::uint64_t kDefaultMasterSeed = 20210719;

/// How the attacker's view of the grid is corrupted.
struct ErrorSpec {
  ErrorTarget target = ErrorTarget::Admittance;
  double half_range = 0.10;  // multipliers drawn from [1 - h, 1 + h]
  int sample_count = 1;
  std::uint64_t master_seed = kDefaultMasterSeed;

  /// Throws ConfigError.
  void validate() const;
};

struct ErrorDraw {
  int sample_index = 0;
  std::vector<double> multipliers;  // one per branch

  bool operator==(const ErrorDraw&) const = default;
};

/// The multiplier of branch `b` in sample `i` depends on (seed, i, b) only,
/// so any sample can be regenerated without replaying the others.
ErrorDraw draw(const ErrorSpec& spec, int sample_index, std::size_t branch_count);

/// Admittance: X / multiplier (admittance scaled by the multiplier).
/// Capacity: rating * multiplier. Nothing else changes.
PerceivedGrid apply(const TrueGrid& truth, const ErrorDraw& draw, ErrorTarget target);

}  // namespace gridrisk
