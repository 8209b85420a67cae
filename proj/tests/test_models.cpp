#include <doctest.h>

#include <cmath>
#include <random>

#include "spde/grid.hpp"
#include "spde/models.hpp"

using namespace spde;

TEST_CASE("preset names round trip") {
  for (PresetId id : {PresetId::linear_heat, PresetId::burgers, PresetId::burgers_multiplicative,
                      PresetId::reaction_diffusion}) {
    CHECK(parse_preset(preset_name(id)) == id);
  }
  CHECK_THROWS(parse_preset("navier_stokes"));
}

TEST_CASE("every preset satisfies its declared hypotheses") {
  PresetParams p;
  p.reaction_a = 1.5;
  p.sigma_s0 = 1.0;
  p.sigma_s1 = 0.4;
  for (PresetId id : {PresetId::linear_heat, PresetId::burgers, PresetId::burgers_multiplicative,
                      PresetId::reaction_diffusion}) {
    const Coefficients c = make_preset(id, p);
    const HypothesisReport r = check_hypotheses(c, 2000, 5.0, 17);
    CHECK(r.samples == 2000);
    CHECK(r.f_growth >= 0.0);
    CHECK(r.sigma_lower >= 0.0);
    CHECK(r.sigma_upper >= 0.0);
  }
}

TEST_CASE("understated constants are caught") {
  Coefficients c = make_preset(PresetId::reaction_diffusion, {});
  c.K = 0.1;
  CHECK_THROWS_AS(check_hypotheses(c, 500, 3.0, 1), HypothesisViolation);

  Coefficients b = make_preset(PresetId::burgers_multiplicative, {1.0, 1.0, 0.5});
  b.sigma_min = 0.9;  // true infimum is s0 - s1 = 0.5
  CHECK_THROWS_AS(check_hypotheses(b, 2000, 50.0, 2), HypothesisViolation);

  Coefficients d = make_preset(PresetId::burgers, {});
  d.K = 0.2;  // |r^2/2| <= K (1 + r^2) needs K >= 1/2
  CHECK_THROWS_AS(check_hypotheses(d, 500, 10.0, 3), HypothesisViolation);
}

TEST_CASE("invalid preset parameters") {
  CHECK_THROWS_AS(make_preset(PresetId::burgers_multiplicative, {1.0, 0.5, 0.5}), ValidationError);
  CHECK_THROWS_AS(make_preset(PresetId::reaction_diffusion, {1.0, 1.0, -0.1}), ValidationError);
  CHECK_THROWS_AS(check_hypotheses(make_preset(PresetId::linear_heat), 10, 1.0, 0), ValidationError);
}

TEST_CASE("coefficient derivatives match finite differences") {
  const Coefficients c = make_preset(PresetId::reaction_diffusion, {0.7, 1.0, 0.3});
  const Coefficients b = make_preset(PresetId::burgers, {});
  std::mt19937_64 gen(4);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  const double h = 1e-6;
  for (int k = 0; k < 50; ++k) {
    const double r = u(gen);
    if (std::abs(r) < 1e-3) continue;
    CHECK(c.f.d_dr(0.3, 0.4, r) == doctest::Approx((c.f.value(0.3, 0.4, r + h) - c.f.value(0.3, 0.4, r - h)) / (2 * h)).epsilon(1e-6));
    CHECK(c.sigma.d_dr(0.3, 0.4, r) ==
          doctest::Approx((c.sigma.value(0.3, 0.4, r + h) - c.sigma.value(0.3, 0.4, r - h)) / (2 * h)).epsilon(1e-6));
    CHECK(b.dg(0.1, 0.2, r) == doctest::Approx(r));
    CHECK(b.g(0.1, 0.2, r) == doctest::Approx(0.5 * r * r));
  }
}

TEST_CASE("truncation weight") {
  CHECK(truncation_weight(0.0, 2.0) == 1.0);
  CHECK(truncation_weight(2.0, 2.0) == 1.0);
  CHECK(truncation_weight(-2.5, 2.0) == 0.5);
  CHECK(truncation_weight(3.0, 2.0) == 0.0);
  CHECK(truncation_weight(-10.0, 2.0) == 0.0);
  CHECK(truncation_weight_derivative(2.5, 2.0) == -1.0);
  CHECK(truncation_weight_derivative(-2.5, 2.0) == 1.0);
  CHECK(truncation_weight_derivative(1.0, 2.0) == 0.0);
}
