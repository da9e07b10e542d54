#include "doctest.h"

#include "gridrisk/attacker.hpp"
#include "gridrisk/perturbation.hpp"
#include "test_support.hpp"

using namespace gridrisk;

TEST_CASE("zero half-range leaves every multiplier at one") {
  ErrorSpec spec;
  spec.half_range = 0.0;
  spec.sample_count = 3;
  const auto d = draw(spec, 2, 38);
  REQUIRE(d.multipliers.size() == 38);
  for (const double m : d.multipliers) CHECK(m == 1.0);
}

TEST_CASE("multipliers stay in range and average to one") {
  ErrorSpec spec;
  spec.half_range = 0.10;
  spec.sample_count = 10000;
  double sum = 0.0;
  std::size_t count = 0;
  for (int i = 0; i < spec.sample_count; ++i) {
    for (const double m : draw(spec, i, 4).multipliers) {
      CHECK_MESSAGE((m >= 0.9 && m <= 1.1), "sample " << i);
      sum += m;
      ++count;
    }
  }
  CHECK(std::abs(sum / static_cast<double>(count) - 1.0) < 0.005);
}

TEST_CASE("draws depend only on seed, sample and branch") {
  ErrorSpec spec;
  spec.sample_count = 100;
  CHECK(draw(spec, 17, 38) == draw(spec, 17, 38));
  CHECK(draw(spec, 17, 38).multipliers != draw(spec, 18, 38).multipliers);
  const auto longer = draw(spec, 17, 40);
  const auto shorter = draw(spec, 17, 38);
  for (std::size_t b = 0; b < 38; ++b) CHECK(longer.multipliers[b] == shorter.multipliers[b]);
  auto other = spec;
  other.master_seed += 1;
  CHECK(draw(other, 17, 38).multipliers != shorter.multipliers);
}

TEST_CASE("applying a draw touches only the chosen parameter") {
  const TrueGrid truth{test::three_bus_ring()};
  ErrorDraw d{0, {1.10, 0.90, 1.0}};

  const auto adm = apply(truth, d, ErrorTarget::Admittance);
  CHECK(adm->branches[0].reactance_pu == doctest::Approx(0.1 / 1.10).epsilon(1e-15));
  CHECK(adm->branches[1].reactance_pu == doctest::Approx(0.1 / 0.90).epsilon(1e-15));
  CHECK(adm->branches[2].reactance_pu == truth->branches[2].reactance_pu);
  for (std::size_t l = 0; l < 3; ++l) CHECK(adm->branches[l].capacity_mw == truth->branches[l].capacity_mw);

  const auto cap = apply(truth, d, ErrorTarget::Capacity);
  CHECK(cap->branches[1].capacity_mw == doctest::Approx(0.9 * 120.0).epsilon(1e-15));
  for (std::size_t l = 0; l < 3; ++l) CHECK(cap->branches[l].reactance_pu == truth->branches[l].reactance_pu);

  CHECK(truth.grid() == test::three_bus_ring());
  CHECK(apply(truth, ErrorDraw{0, {1.0, 1.0, 1.0}}, ErrorTarget::Admittance).grid() == truth.grid());
  CHECK_THROWS_AS(apply(truth, ErrorDraw{0, {1.0}}, ErrorTarget::Capacity), ConfigError);
}

TEST_CASE("error spec validation and target names") {
  ErrorSpec spec;
  spec.half_range = 1.0;
  CHECK_THROWS_AS(spec.validate(), ConfigError);
  spec.half_range = 0.1;
  spec.sample_count = 0;
  CHECK_THROWS_AS(spec.validate(), ConfigError);
  CHECK(parse_error_target("capacity") == ErrorTarget::Capacity);
  CHECK(to_string(ErrorTarget::Admittance) == "admittance");
  CHECK_THROWS_AS(parse_error_target("topology"), ConfigError);
}
