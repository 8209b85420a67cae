#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>

namespace spde {

/// A map (t, x, r) -> real together with its r-derivative.
struct PointwiseMap {
  std::function<double(double t, double x, double r)> value;
  std::function<double(double t, double x, double r)> d_dr;
};

/// Coefficient triple (f, g = g1 + g2, sigma) of the semilinear equation
///   du = (u_xx + d/dx g(t,x,u) + f(t,x,u)) dt + sqrt(eps) sigma(t,x,u) dW
/// with the constants under which its growth and Lipschitz hypotheses hold.
/// `g2` ignores its x argument.
struct Coefficients {
  std::string name;
  PointwiseMap f;
  PointwiseMap g1;
  PointwiseMap g2;
  PointwiseMap sigma;
  double K = 0.0;  // growth constant
  double L = 0.0;  // Lipschitz constant
  double sigma_min = 0.0;
  double sigma_max = 0.0;

  double g(double t, double x, double r) const { return g1.value(t, x, r) + g2.value(t, x, r); }
  double dg(double t, double x, double r) const { return g1.d_dr(t, x, r) + g2.d_dr(t, x, r); }
  /// True when sigma does not depend on the state (constant per (t, x)).
  bool additive_noise = false;
};

/// Parameters of the built-in presets.
struct PresetParams {
  double reaction_a = 1.0;  // f = a sin(r)
  double sigma_s0 = 1.0;    // sigma = s0 + s1 r / (1 + |r|)
  double sigma_s1 = 0.0;
};

enum class PresetId { linear_heat, burgers, burgers_multiplicative, reaction_diffusion };

PresetId parse_preset(const std::string& name);
std::string preset_name(PresetId id);
Coefficients make_preset(PresetId id, const PresetParams& params = {});

/// Raised when a sampled point violates one of the declared inequalities.
class HypothesisViolation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Smallest slack (bound minus observed value) seen for each inequality.
struct HypothesisReport {
  long samples = 0;
  double f_growth = 0.0;
  double g1_growth = 0.0;
  double g2_growth = 0.0;
  double sigma_lipschitz = 0.0;
  double f_local_lipschitz = 0.0;
  double g_local_lipschitz = 0.0;
  double sigma_lower = 0.0;
  double sigma_upper = 0.0;
};

/// Samples (t, x, r) and (t, x, p, q) uniformly in [0,T] x [0,1] x [-r_box, r_box]
/// and checks every growth, Lipschitz and sigma-range inequality against the
/// declared constants. Throws HypothesisViolation naming the inequality and
/// the witness point on the first failure.
HypothesisReport check_hypotheses(const Coefficients& c, int n_samples, double r_box,
                                  std::uint64_t seed, double T = 1.0);

/// Gyongy-style cutoff: 1 for |r| <= n, 0 for |r| >= n+1, linear in between.
double truncation_weight(double r, double n);
double truncation_weight_derivative(double r, double n);

}  // namespace spde
