#include "gridrisk/perturbation.hpp"

#include <cmath>
#include <random>

#include "gridrisk/attacker.hpp"

namespace gridrisk {

std::string to_string(ErrorTarget target) { return target == ErrorTarget::Admittance ? "admittance" : "capacity"; }

ErrorTarget parse_error_target(const std::string& text) {
  if (text == "admittance") return ErrorTarget::Admittance;
  if (text == "capacity") return ErrorTarget::Capacity;
  throw ConfigError("unknown error target '" + text + "'");
}

void ErrorSpec::validate() const {
  if (!(half_range >= 0.0 && half_range < 1.0)) throw ConfigError("half_range must lie in [0, 1)");
  if (sample_count < 1) throw ConfigError("sample_count must be at least 1");
}

namespace {

// One engine per (seed, sample, branch): the seed sequence mixes the three
// coordinates so neighbouring indices give unrelated streams.
double unit_uniform(std::uint64_t seed, int sample, std::size_t branch) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(sample), static_cast<std::uint32_t>(branch)};
  std::mt19937_64 engine(seq);
  // 53 random mantissa bits; portable where uniform_real_distribution is not.
  return static_cast<double>(engine() >> 11) * 0x1.0p-53;
}

}  // namespace

ErrorDraw draw(const ErrorSpec& spec, int sample_index, std::size_t branch_count) {
  spec.validate();
  ErrorDraw d;
  d.sample_index = sample_index;
  d.multipliers.reserve(branch_count);
  const double h = spec.half_range;
  for (std::size_t b = 0; b < branch_count; ++b) {
    if (h == 0.0) {
      d.multipliers.push_back(1.0);
      continue;
    }
    const double u = unit_uniform(spec.master_seed, sample_index, b);
    d.multipliers.push_back((1.0 - h) + 2.0 * h * u);
  }
  return d;
}

PerceivedGrid apply(const TrueGrid& truth, const ErrorDraw& draw, ErrorTarget target) {
  GridCase g = truth.grid();
  if (draw.multipliers.size() != g.branch_count()) {
    throw ConfigError("error draw has " + std::to_string(draw.multipliers.size()) + " multipliers for " +
                      std::to_string(g.branch_count()) + " branches");
  }
  for (std::size_t b = 0; b < g.branch_count(); ++b) {
    const double m = draw.multipliers[b];
    if (m == 1.0) continue;
    if (target == ErrorTarget::Admittance) {
      g.branches[b].reactance_pu /= m;
    } else {
      g.branches[b].capacity_mw *= m;
    }
  }
  return PerceivedGrid{std::move(g)};
}

}  // namespace gridrisk
