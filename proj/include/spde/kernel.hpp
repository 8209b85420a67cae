#pragma once

#include <array>
#include <span>
#include <string>
#include <vector>

#include "spde/grid.hpp"

namespace spde::kernel {

/// Which kernel quantity to evaluate.
enum class Quantity { value, d_dx, d_dy, d_dt };

/// Truncation settings for the Dirichlet heat kernel on [0,1].
///
/// For t >= t_switch the sine series is used with `k_max` terms, below it the
/// method-of-images Gaussian sum with `image_count` images per side. Leaving
/// `k_max` or `image_count` at 0 sizes them from `tol`.
struct KernelConfig {
  int k_max = 0;
  int image_count = 0;
  double t_switch = 0.05;
  double tol = 1e-15;
  double T = 1.0;
};

/// Sine-series value with terms added until they drop below `tol`.
double spectral_sum(Quantity q, double t, double x, double y, double tol = 1e-16);
/// Sine series truncated at exactly `k_max` terms.
double spectral_sum_fixed(Quantity q, double t, double x, double y, int k_max);

/// Image-charge value with images added until they drop below `tol`.
double image_sum(Quantity q, double t, double x, double y, double tol = 1e-16);
/// Image-charge sum over images n = -count..count.
double image_sum_fixed(Quantity q, double t, double x, double y, int count);

/// Image-charge sum with the Gaussian factor exp(-(x-y)^2/(4t)) divided out.
/// Every summand is then bounded, so the result stays finite for t -> 0
/// where the unscaled kernel underflows.
double scaled_image_sum(Quantity q, double t, double x, double y);

/// Dirichlet heat kernel G_t(x,y) of d/dt - d^2/dx^2 on [0,1].
class HeatKernel {
 public:
  explicit HeatKernel(KernelConfig cfg = {});

  double G(double t, double x, double y) const { return eval(Quantity::value, t, x, y); }
  double dGdx(double t, double x, double y) const { return eval(Quantity::d_dx, t, x, y); }
  double dGdy(double t, double x, double y) const { return eval(Quantity::d_dy, t, x, y); }
  double dGdt(double t, double x, double y) const { return eval(Quantity::d_dt, t, x, y); }

  double eval(Quantity q, double t, double x, double y) const;

  const KernelConfig& config() const { return cfg_; }

 private:
  KernelConfig cfg_;
};

/// G_t(x,y) with default truncation; domain_error for t <= 0 or x, y outside [0,1].
double eval_G(double t, double x, double y);
/// d/dy G_t(x,y) with default truncation.
double eval_dGdy(double t, double x, double y);

/// y -> int G_t(., y) u(y) dy on the interior nodes, realized as a discrete
/// sine transform with exact Dirichlet eigenvalues k^2 pi^2.
std::vector<double> apply_semigroup(std::span<const double> u, double t, const GridSpec& grid);

/// max over grid nodes (boundaries included) of
/// | int G_s(x,z) G_t(z,y) dz - G_{s+t}(x,y) |, inner integral by the trapezoid rule.
double semigroup_identity_error(double s, double t, int nx);

/// One fitted envelope constant.
struct EstimateFit {
  int id = 0;
  double fitted_K = 0.0;
  double fitted_exponent = 0.0;
  double max_ratio = 0.0;
  long samples = 0;
  bool pass = false;
};

struct KernelBoundReport {
  std::array<EstimateFit, 4> fits{};
  bool pass = false;
};

/// Deterministic sample design for check_kernel_bounds.
struct BoundSampling {
  int n_time = 32;   // time levels in [0, T]; pairs s < t
  int n_space = 32;  // positions in [0, 1], endpoints included
  double alpha = 0.2;
  double gamma = 2.0;
  double dim = 1.0;
  int holder_modes = 2000;
};

/// Integral over [0,T] x [0,1] of |G_{t-r}(x,z) - G_{s-r}(y,z)|^2 dz dr for
/// s < t, with G_u = 0 for u <= 0 (closed form per sine mode, `modes` modes).
double holder_integral(double s, double t, double x, double y, int modes);

/// Least upper bounds of the sampled envelope ratios for the three Gaussian
/// envelopes (value, d/dx, d/dt) and the Hoelder-type increment estimate.
KernelBoundReport check_kernel_bounds(const KernelConfig& cfg, const BoundSampling& sampling);

/// CSV with header estimate_id,fitted_K,fitted_exponent,max_ratio,pass.
std::string to_csv(const KernelBoundReport& report);

}  // namespace spde::kernel
