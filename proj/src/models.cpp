#include "spde/models.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "spde/grid.hpp"

namespace spde {
namespace {

PointwiseMap zero_map() {
  return {[](double, double, double) { return 0.0; }, [](double, double, double) { return 0.0; }};
}

PointwiseMap constant_map(double c) {
  return {[c](double, double, double) { return c; }, [](double, double, double) { return 0.0; }};
}

PointwiseMap half_square() {
  return {[](double, double, double r) { return 0.5 * r * r; },
          [](double, double, double r) { return r; }};
}

// s0 + s1 r / (1 + |r|): bounded in [s0 - s1, s0 + s1], Lipschitz with constant s1.
PointwiseMap saturating_sigma(double s0, double s1) {
  return {[s0, s1](double, double, double r) { return s0 + s1 * r / (1.0 + std::abs(r)); },
          [s1](double, double, double r) {
            const double d = 1.0 + std::abs(r);
            return s1 / (d * d);
          }};
}

void check_sigma_params(const PresetParams& p) {
  if (!(p.sigma_s0 > p.sigma_s1) || p.sigma_s1 < 0.0) {
    throw ValidationError("preset: need sigma_s0 > sigma_s1 >= 0");
  }
}

}  // namespace

PresetId parse_preset(const std::string& name) {
  if (name == "linear_heat") return PresetId::linear_heat;
  if (name == "burgers") return PresetId::burgers;
  if (name == "burgers_multiplicative") return PresetId::burgers_multiplicative;
  if (name == "reaction_diffusion") return PresetId::reaction_diffusion;
  throw ValidationError("unknown preset '" + name + "'");
}

std::string preset_name(PresetId id) {
  switch (id) {
    case PresetId::linear_heat: return "linear_heat";
    case PresetId::burgers: return "burgers";
    case PresetId::burgers_multiplicative: return "burgers_multiplicative";
    case PresetId::reaction_diffusion: return "reaction_diffusion";
  }
  return "unknown";
}

Coefficients make_preset(PresetId id, const PresetParams& params) {
  Coefficients c;
  c.name = preset_name(id);
  c.f = zero_map();
  c.g1 = zero_map();
  c.g2 = zero_map();
  c.sigma = constant_map(1.0);
  c.sigma_min = 1.0;
  c.sigma_max = 1.0;
  c.additive_noise = true;
  switch (id) {
    case PresetId::linear_heat:
      break;
    case PresetId::burgers:
      c.g2 = half_square();
      c.K = 0.5;
      c.L = 0.5;
      break;
    case PresetId::burgers_multiplicative:
      check_sigma_params(params);
      c.g2 = half_square();
      c.sigma = saturating_sigma(params.sigma_s0, params.sigma_s1);
      c.K = 0.5;
      c.L = std::max(0.5, params.sigma_s1);
      c.sigma_min = params.sigma_s0 - params.sigma_s1;
      c.sigma_max = params.sigma_s0 + params.sigma_s1;
      c.additive_noise = params.sigma_s1 == 0.0;
      break;
    case PresetId::reaction_diffusion: {
      check_sigma_params(params);
      const double a = params.reaction_a;
      c.f = {[a](double, double, double r) { return a * std::sin(r); },
             [a](double, double, double r) { return a * std::cos(r); }};
      c.sigma = saturating_sigma(params.sigma_s0, params.sigma_s1);
      c.K = std::abs(a);
      c.L = std::max(std::abs(a), params.sigma_s1);
      c.sigma_min = params.sigma_s0 - params.sigma_s1;
      c.sigma_max = params.sigma_s0 + params.sigma_s1;
      c.additive_noise = params.sigma_s1 == 0.0;
      break;
    }
  }
  return c;
}

namespace {

struct Witness {
  double t, x, p, q;
};

[[noreturn]] void violated(const std::string& what, const Witness& w, double lhs, double rhs) {
  std::ostringstream msg;
  msg.precision(17);
  msg << "hypothesis violated: " << what << " at (t=" << w.t << ", x=" << w.x << ", p=" << w.p
      << ", q=" << w.q << "): " << lhs << " > " << rhs;
  throw HypothesisViolation(msg.str());
}

// Records bound - value, failing when value exceeds bound beyond rounding.
void check(double value, double bound, double& worst, const char* what, const Witness& w) {
  const double slack = bound - value;
  worst = std::min(worst, slack);
  if (value > bound * (1.0 + 1e-12) + 1e-12) violated(what, w, value, bound);
}

}  // namespace

HypothesisReport check_hypotheses(const Coefficients& c, int n_samples, double r_box,
                                  std::uint64_t seed, double T) {
  if (n_samples < 100) throw ValidationError("check_hypotheses: n_samples must be >= 100");
  if (!(r_box > 0.0)) throw ValidationError("check_hypotheses: r_box must be > 0");
  constexpr double inf = std::numeric_limits<double>::infinity();
  HypothesisReport rep{0, inf, inf, inf, inf, inf, inf, inf, inf};
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> ut(0.0, T), ux(0.0, 1.0), ur(-r_box, r_box);
  for (int n = 0; n < n_samples; ++n) {
    const Witness w{ut(gen), ux(gen), ur(gen), ur(gen)};
    const double t = w.t, x = w.x, p = w.p, q = w.q;
    check(std::abs(c.f.value(t, x, p)), c.K * (1.0 + std::abs(p)), rep.f_growth, "|f| <= K(1+|r|)", w);
    check(std::abs(c.g1.value(t, x, p)), c.K * (1.0 + std::abs(p)), rep.g1_growth, "|g1| <= K(1+|r|)", w);
    check(std::abs(c.g2.value(t, x, p)), c.K * (1.0 + p * p), rep.g2_growth, "|g2| <= K(1+|r|^2)", w);
    const double dpq = std::abs(p - q);
    check(std::abs(c.sigma.value(t, x, p) - c.sigma.value(t, x, q)), c.L * dpq, rep.sigma_lipschitz,
          "|sigma(p)-sigma(q)| <= L|p-q|", w);
    const double local = c.L * (1.0 + std::abs(p) + std::abs(q)) * dpq;
    check(std::abs(c.f.value(t, x, p) - c.f.value(t, x, q)), local, rep.f_local_lipschitz,
          "|f(p)-f(q)| <= L(1+|p|+|q|)|p-q|", w);
    check(std::abs(c.g(t, x, p) - c.g(t, x, q)), local, rep.g_local_lipschitz,
          "|g(p)-g(q)| <= L(1+|p|+|q|)|p-q|", w);
    const double sp = c.sigma.value(t, x, p);
    check(c.sigma_min, sp, rep.sigma_lower, "sigma_min <= sigma", w);
    check(sp, c.sigma_max, rep.sigma_upper, "sigma <= sigma_max", w);
    ++rep.samples;
  }
  return rep;
}

double truncation_weight(double r, double n) {
  const double a = std::abs(r);
  if (a <= n) return 1.0;
  if (a >= n + 1.0) return 0.0;
  return n + 1.0 - a;
}

double truncation_weight_derivative(double r, double n) {
  const double a = std::abs(r);
  if (a <= n || a >= n + 1.0) return 0.0;
  return r > 0.0 ? -1.0 : 1.0;
}

}  // namespace spde
