#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "spde/rate.hpp"

using namespace spde;

namespace {

constexpr double pi = std::numbers::pi;

Control random_smooth_control(const GridSpec& g, std::mt19937_64& gen) {
  std::normal_distribution<double> n(0.0, 1.0);
  const double a = n(gen), b = n(gen), c = n(gen), d = n(gen);
  return Control::from_function(g, [=](double t, double x) {
    return a * std::sin(pi * x) + b * t * std::sin(2 * pi * x) + c * std::cos(3 * t) * x * (1 - x) + d * t * t;
  });
}

std::vector<double> root2_sine(const GridSpec& g) {
  return sample_profile(g, [](double x) { return std::numbers::sqrt2 * std::sin(pi * x); });
}

}  // namespace

TEST_CASE("direct rate of a skeleton path is half the control norm") {
  GridSpec g;
  g.nx = 31;
  g.nt = 60;
  std::mt19937_64 gen(21);
  const auto eta = sample_profile(g, [](double x) { return 0.5 * std::sin(pi * x); });
  for (PresetId id : {PresetId::linear_heat, PresetId::burgers, PresetId::burgers_multiplicative,
                      PresetId::reaction_diffusion}) {
    const Coefficients c = make_preset(id, {0.8, 1.0, 0.5});
    for (int k = 0; k < 3; ++k) {
      const Control v = random_smooth_control(g, gen);
      const Trajectory h = solve_skeleton(eta, c, g, v);
      const RateResult r = evaluate_rate_direct(eta, c, h, g);
      CHECK(r.value == doctest::Approx(0.5 * v.norm_sq()).epsilon(1e-10));
      // The recovered control is the one that generated the path.
      for (std::size_t m = 0; m < v.values().flat().size(); ++m) {
        CHECK(r.control.values().flat()[m] == doctest::Approx(v.values().flat()[m]).epsilon(1e-8).scale(1.0));
      }
    }
  }
}

TEST_CASE("uncontrolled paths cost nothing") {
  GridSpec g;
  g.nx = 15;
  g.nt = 30;
  const auto eta = sample_profile(g, [](double x) { return std::sin(pi * x); });
  const Coefficients c = make_preset(PresetId::burgers);
  const Trajectory h = solve_skeleton(eta, c, g, Control::zero(g));
  CHECK(evaluate_rate_direct(eta, c, h, g).value == doctest::Approx(0.0).scale(1.0));
}

TEST_CASE("direct rate rejects paths that do not start at eta and degenerate sigma") {
  GridSpec g;
  g.nx = 7;
  g.nt = 5;
  const Coefficients c = make_preset(PresetId::linear_heat);
  const std::vector<double> eta(g.nx, 0.0);
  Trajectory h = solve_skeleton(eta, c, g, Control::zero(g));
  h.values(0, 3) = 1.0;
  CHECK_THROWS_AS(evaluate_rate_direct(eta, c, h, g), ValidationError);
  Coefficients d = c;
  d.sigma_min = 0.0;
  d.sigma = {[](double, double, double r) { return r * r; }, [](double, double, double r) { return 2 * r; }};
  CHECK_THROWS_AS(evaluate_rate_direct(eta, d, solve_skeleton(eta, c, g, Control::zero(g)), g), UnsupportedDegeneracy);
}

TEST_CASE("adjoint gradient matches central differences") {
  GridSpec g;
  g.nx = 31;
  g.nt = 50;
  std::mt19937_64 gen(3);
  const auto eta = sample_profile(g, [](double x) { return std::sin(pi * x); });
  TargetSpec target;
  target.kind = TargetSpec::Kind::terminal_field;
  target.profile = sample_profile(g, [](double x) { return 0.3 * std::sin(2 * pi * x); });
  target.penalty_weight = 5.0;
  for (PresetId id : {PresetId::linear_heat, PresetId::burgers, PresetId::burgers_multiplicative,
                      PresetId::reaction_diffusion}) {
    const Coefficients c = make_preset(id, {1.2, 1.0, 0.5});
    const Control v = random_smooth_control(g, gen);
    const ObjectiveEval e = evaluate_objective(v, eta, c, g, target);
    for (int k = 0; k < 3; ++k) {
      const Control dir = random_smooth_control(g, gen);
      const double h = 1e-5;
      Field2D plus = v.values(), minus = v.values();
      for (std::size_t m = 0; m < plus.flat().size(); ++m) {
        plus.flat()[m] += h * dir.values().flat()[m];
        minus.flat()[m] -= h * dir.values().flat()[m];
      }
      const double fd = (evaluate_objective(Control(g, plus), eta, c, g, target).objective -
                         evaluate_objective(Control(g, minus), eta, c, g, target).objective) / (2 * h);
      const double ad = control_inner(e.gradient, dir);
      CHECK(std::abs(ad - fd) <= 1e-6 * std::abs(fd));
    }
  }
}

TEST_CASE("one-sided projection penalty") {
  GridSpec g;
  g.nx = 15;
  TargetSpec t;
  t.profile = root2_sine(g);
  t.level = 1.0;
  t.penalty_weight = 2.0;
  std::vector<double> u(g.nx);
  for (int i = 0; i < g.nx; ++i) u[i] = 2.0 * t.profile[i];  // projection = 2 * |profile|^2 = 2
  const TerminalPenalty met = terminal_penalty(t, u, g.dx());
  CHECK(met.penalty == 0.0);
  CHECK(met.violation == 0.0);
  for (auto& x : u) x *= 0.25;  // projection 1/2, deficit 1/2
  const TerminalPenalty miss = terminal_penalty(t, u, g.dx());
  CHECK(miss.violation == doctest::Approx(0.5));
  CHECK(miss.penalty == doctest::Approx(0.25));
}

TEST_CASE("minimized action matches the discrete first-mode gramian") {
  // eta = 0, linear heat: <U^N, phi> = sum_j w_j <v_j, phi> with w_j = amp^{N-1-j} / den,
  // and |phi|_{dx} = 1 exactly, so the least action reaching level c is c^2 / (2 sum_j dt w_j^2).
  GridSpec g;
  g.nx = 15;
  g.nt = 40;
  const double mu = -4.0 / (g.dx() * g.dx()) * std::pow(std::sin(pi * g.dx() / 2.0), 2);
  const double den = 1.0 - g.theta * g.dt() * mu;
  const double amp = (1.0 + (1.0 - g.theta) * g.dt() * mu) / den;
  double gram = 0.0;
  for (int j = 0; j < g.nt; ++j) gram += g.dt() * std::pow(std::pow(amp, g.nt - 1 - j) / den, 2);
  TargetSpec t;
  t.profile = root2_sine(g);
  t.level = 0.5;
  t.tolerance = 1e-7;
  const std::vector<double> eta(g.nx, 0.0);
  const RateResult r = minimize_rate(eta, make_preset(PresetId::linear_heat), g, t);
  CHECK(r.converged);
  CHECK(r.constraint_violation <= 1e-7);
  CHECK(r.value == doctest::Approx(t.level * t.level / (2.0 * gram)).epsilon(1e-5));
  // Already-met targets cost nothing.
  t.level = -1.0;
  CHECK(minimize_rate(eta, make_preset(PresetId::linear_heat), g, t).value == 0.0);
}

TEST_CASE("minimizer reaches a terminal field target for Burgers") {
  GridSpec g;
  g.nx = 15;
  g.nt = 40;
  TargetSpec t;
  t.kind = TargetSpec::Kind::terminal_field;
  t.profile = sample_profile(g, [](double x) { return 0.4 * std::sin(pi * x); });
  t.tolerance = 1e-4;
  const std::vector<double> eta(g.nx, 0.0);
  const Coefficients c = make_preset(PresetId::burgers);
  const RateResult r = minimize_rate(eta, c, g, t);
  CHECK(r.converged);
  const Trajectory h = solve_skeleton(eta, c, g, r.control);
  double sq = 0.0;
  for (int i = 0; i < g.nx; ++i) sq += std::pow(h.values(g.nt, i) - t.profile[i], 2) * g.dx();
  CHECK(std::sqrt(sq) <= 1e-4);
  // The reported value is the action of the returned control.
  CHECK(r.value == doctest::Approx(0.5 * r.control.norm_sq()));
}

TEST_CASE("rate CSV layout") {
  RateResult r;
  r.value = 1.5;
  r.iterations = 7;
  r.converged = true;
  CHECK(rate_csv_header() == "value,iterations,grad_norm,converged");
  CHECK(rate_csv_row(r) == "1.5,7,0,true");
}
