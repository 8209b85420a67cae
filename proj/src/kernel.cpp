#include "spde/kernel.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace spde::kernel {
namespace {

constexpr double kPi = std::numbers::pi;

void check_domain(double t, double x, double y) {
  if (!(t > 0.0)) throw std::domain_error("heat kernel: t must be > 0");
  if (!(x >= 0.0 && x <= 1.0) || !(y >= 0.0 && y <= 1.0)) {
    throw std::domain_error("heat kernel: x and y must lie in [0,1]");
  }
}

bool on_boundary(double z) { return z == 0.0 || z == 1.0; }

// Quantities that vanish identically when a coordinate sits on the boundary.
bool vanishes_on_boundary(Quantity q, double x, double y) {
  switch (q) {
    case Quantity::value:
    case Quantity::d_dt:
      return on_boundary(x) || on_boundary(y);
    case Quantity::d_dx:
      return on_boundary(y);
    case Quantity::d_dy:
      return on_boundary(x);
  }
  return false;
}

int power_of(Quantity q) {
  switch (q) {
    case Quantity::value: return 0;
    case Quantity::d_dx:
    case Quantity::d_dy: return 1;
    case Quantity::d_dt: return 2;
  }
  return 0;
}

double spectral_term(Quantity q, int k, double t, double x, double y) {
  const double kpi = k * kPi;
  const double decay = std::exp(-kpi * kpi * t);
  switch (q) {
    case Quantity::value:
      return 2.0 * (std::sin(kpi * x) * std::sin(kpi * y)) * decay;
    case Quantity::d_dx:
      return 2.0 * kpi * std::cos(kpi * x) * std::sin(kpi * y) * decay;
    case Quantity::d_dy:
      return 2.0 * kpi * std::sin(kpi * x) * std::cos(kpi * y) * decay;
    case Quantity::d_dt:
      return -2.0 * kpi * kpi * (std::sin(kpi * x) * std::sin(kpi * y)) * decay;
  }
  return 0.0;
}

// Upper bound on |spectral_term| for mode k.
double spectral_term_bound(Quantity q, int k, double t) {
  const double kpi = k * kPi;
  return 2.0 * std::pow(kpi, power_of(q)) * std::exp(-kpi * kpi * t);
}

// Polynomial prefactor c(z) with d/d(.) phi(z) = c(z) phi(z), phi the free Gaussian.
double gaussian_factor(Quantity q, double z, double t) {
  switch (q) {
    case Quantity::value: return 1.0;
    case Quantity::d_dx:
    case Quantity::d_dy: return -z / (2.0 * t);
    case Quantity::d_dt: return z * z / (4.0 * t * t) - 1.0 / (2.0 * t);
  }
  return 1.0;
}

// Contribution of image n, with exp(-shift/(4t)) multiplied into both Gaussians.
double image_pair(Quantity q, int n, double t, double x, double y, double shift) {
  const double z1 = x - y + 2.0 * n;
  const double z2 = x + y + 2.0 * n;
  const double g1 = std::exp(-(z1 * z1 - shift) / (4.0 * t));
  const double g2 = std::exp(-(z2 * z2 - shift) / (4.0 * t));
  const double c1 = gaussian_factor(q, z1, t);
  const double c2 = gaussian_factor(q, z2, t);
  switch (q) {
    case Quantity::value:
    case Quantity::d_dt:
    case Quantity::d_dx:
      return c1 * g1 - c2 * g2;
    case Quantity::d_dy:
      // d/dy of phi(x-y+2n) flips the sign of the first derivative.
      return -c1 * g1 - c2 * g2;
  }
  return 0.0;
}

// Bound on one omitted image with |z| >= zmin.
double image_term_bound(Quantity q, double zmin, double t) {
  const double poly = 1.0 + zmin / (2.0 * t) + (q == Quantity::d_dt ? zmin * zmin / (4.0 * t * t) + 1.0 / (2.0 * t) : 0.0);
  return 2.0 * poly * std::exp(-zmin * zmin / (4.0 * t)) / std::sqrt(4.0 * kPi * t);
}

int images_needed(Quantity q, double t, double tol) {
  int n = 1;
  while (image_term_bound(q, 2.0 * n, t) >= tol && n < 100000) ++n;
  return n;
}

double image_sum_scaled(Quantity q, double t, double x, double y, int count, double shift) {
  double s = image_pair(q, 0, t, x, y, shift);
  for (int n = 1; n <= count; ++n) {
    s += image_pair(q, n, t, x, y, shift) + image_pair(q, -n, t, x, y, shift);
  }
  return s / std::sqrt(4.0 * kPi * t);
}

}  // namespace

double spectral_sum_fixed(Quantity q, double t, double x, double y, int k_max) {
  check_domain(t, x, y);
  if (vanishes_on_boundary(q, x, y)) return 0.0;
  double s = 0.0;
  for (int k = 1; k <= k_max; ++k) s += spectral_term(q, k, t, x, y);
  return s;
}

double spectral_sum(Quantity q, double t, double x, double y, double tol) {
  check_domain(t, x, y);
  if (vanishes_on_boundary(q, x, y)) return 0.0;
  double s = 0.0;
  const double peak = 0.5 * power_of(q);
  for (int k = 1; k < 10'000'000; ++k) {
    s += spectral_term(q, k, t, x, y);
    const double kpi = k * kPi;
    if (kpi * kpi * t > peak && spectral_term_bound(q, k + 1, t) < tol) break;
  }
  return s;
}

double image_sum_fixed(Quantity q, double t, double x, double y, int count) {
  check_domain(t, x, y);
  if (vanishes_on_boundary(q, x, y)) return 0.0;
  return image_sum_scaled(q, t, x, y, count, 0.0);
}

double image_sum(Quantity q, double t, double x, double y, double tol) {
  return image_sum_fixed(q, t, x, y, images_needed(q, t, tol));
}

double scaled_image_sum(Quantity q, double t, double x, double y) {
  check_domain(t, x, y);
  if (vanishes_on_boundary(q, x, y)) return 0.0;
  const double r = x - y;
  // Images beyond 2n - 2 > sqrt(4 t * 40) + 1 contribute below 1e-17 relative.
  const int count = std::max(2, static_cast<int>(std::ceil((std::sqrt(160.0 * t) + 3.0) / 2.0)));
  return image_sum_scaled(q, t, x, y, count, r * r);
}

HeatKernel::HeatKernel(KernelConfig cfg) : cfg_(cfg) {
  if (!(cfg_.tol > 0.0)) throw ValidationError("kernel: tol must be > 0");
  if (!(cfg_.T > 0.0)) throw ValidationError("kernel: T must be > 0");
  if (!(cfg_.t_switch > 0.0) || cfg_.t_switch > cfg_.T) {
    throw ValidationError("kernel: t_switch must satisfy 0 < t_switch <= T");
  }
  const auto worst_spectral = [&](int k) {
    double b = 0.0;
    for (Quantity q : {Quantity::value, Quantity::d_dx, Quantity::d_dt}) {
      b = std::max(b, spectral_term_bound(q, k, cfg_.t_switch));
    }
    return b;
  };
  const auto spectral_ok = [&](int k) {
    const double kpi = (k + 1) * kPi;
    return kpi * kpi * cfg_.t_switch > 1.0 && worst_spectral(k + 1) < cfg_.tol;
  };
  const auto images_ok = [&](int n) {
    return image_term_bound(Quantity::d_dt, 2.0 * n, cfg_.t_switch) < cfg_.tol;
  };
  if (cfg_.k_max == 0) {
    int k = 1;
    while (!spectral_ok(k)) ++k;
    cfg_.k_max = k;
  } else if (cfg_.k_max < 1 || !spectral_ok(cfg_.k_max)) {
    throw ValidationError("kernel: k_max too small for tol at t_switch");
  }
  if (cfg_.image_count == 0) {
    int n = 1;
    while (!images_ok(n)) ++n;
    cfg_.image_count = n;
  } else if (cfg_.image_count < 1 || !images_ok(cfg_.image_count)) {
    throw ValidationError("kernel: image_count too small for tol at t_switch");
  }
}

double HeatKernel::eval(Quantity q, double t, double x, double y) const {
  if (t < cfg_.t_switch) return image_sum_fixed(q, t, x, y, cfg_.image_count);
  return spectral_sum_fixed(q, t, x, y, cfg_.k_max);
}

namespace {
const HeatKernel& default_kernel() {
  static const HeatKernel kernel{};
  return kernel;
}
}  // namespace

double eval_G(double t, double x, double y) { return default_kernel().G(t, x, y); }
double eval_dGdy(double t, double x, double y) { return default_kernel().dGdy(t, x, y); }

namespace {
std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

// Unnormalized DST-I (FFTW RODFT00): out_k = 2 sum_j in_j sin(pi (j+1)(k+1)/(n+1)).
void dst1(std::vector<double>& in, std::vector<double>& out) {
  const int n = static_cast<int>(in.size());
  fftw_plan plan;
  {
    std::lock_guard lock(fftw_planner_mutex());
    plan = fftw_plan_r2r_1d(n, in.data(), out.data(), FFTW_RODFT00, FFTW_ESTIMATE);
  }
  fftw_execute_r2r(plan, in.data(), out.data());
  std::lock_guard lock(fftw_planner_mutex());
  fftw_destroy_plan(plan);
}
}  // namespace

std::vector<double> apply_semigroup(std::span<const double> u, double t, const GridSpec& grid) {
  grid.validate();
  if (u.size() != static_cast<std::size_t>(grid.nx)) {
    throw ValidationError("apply_semigroup: field has " + std::to_string(u.size()) +
                          " entries, grid has " + std::to_string(grid.nx));
  }
  if (t < 0.0) throw std::domain_error("apply_semigroup: t must be >= 0");
  std::vector<double> field(u.begin(), u.end());
  if (t == 0.0) return field;
  std::vector<double> coeffs(field.size());
  dst1(field, coeffs);
  for (std::size_t k = 0; k < coeffs.size(); ++k) {
    const double kpi = static_cast<double>(k + 1) * kPi;
    coeffs[k] *= std::exp(-kpi * kpi * t);
  }
  dst1(coeffs, field);
  const double norm = 1.0 / (2.0 * (grid.nx + 1));
  for (double& v : field) v *= norm;
  return field;
}

double semigroup_identity_error(double s, double t, int nx) {
  if (!(s > 0.0) || !(t > 0.0)) throw std::domain_error("semigroup_identity_error: s, t must be > 0");
  if (nx < 2) throw ValidationError("semigroup_identity_error: nx must be >= 2");
  const HeatKernel& kernel = default_kernel();
  const int n = nx + 2;
  const double h = 1.0 / (nx + 1);
  std::vector<double> gs(static_cast<std::size_t>(n) * n), gt(gs.size());
  for (int i = 0; i < n; ++i) {
    for (int m = 0; m < n; ++m) {
      gs[i * n + m] = kernel.G(s, i * h, m * h);
      gt[i * n + m] = kernel.G(t, i * h, m * h);
    }
  }
  double worst = 0.0;
#pragma omp parallel for reduction(max : worst) schedule(static)
  for (int i = 0; i < n; ++i) {
    for (int l = 0; l < n; ++l) {
      double integral = 0.0;
      for (int m = 0; m < n; ++m) {
        const double w = (m == 0 || m == n - 1) ? 0.5 * h : h;
        integral += w * gs[i * n + m] * gt[m * n + l];
      }
      worst = std::max(worst, std::abs(integral - kernel.G(s + t, i * h, l * h)));
    }
  }
  return worst;
}

double holder_integral(double s, double t, double x, double y, int modes) {
  if (!(s < t) || s < 0.0) throw std::domain_error("holder_integral: need 0 <= s < t");
  double sum = 0.0;
  for (int k = 1; k <= modes; ++k) {
    const double lam = k * k * kPi * kPi;
    const double sx = std::sin(k * kPi * x);
    const double sy = std::sin(k * kPi * y);
    const double e_far = (std::exp(-2.0 * lam * (t - s)) - std::exp(-2.0 * lam * t)) / (2.0 * lam);
    const double e_cross = (std::exp(-lam * (t - s)) - std::exp(-lam * (t + s))) / (2.0 * lam);
    const double e_near = -std::expm1(-2.0 * lam * s) / (2.0 * lam);
    const double e_gap = -std::expm1(-2.0 * lam * (t - s)) / (2.0 * lam);
    sum += sx * sx * (e_far + e_gap) - 2.0 * sx * sy * e_cross + sy * sy * e_near;
  }
  return 2.0 * sum;
}

namespace {

struct TimePair {
  double s;
  double t;
};

std::vector<TimePair> time_pairs(double T, int n) {
  std::vector<TimePair> pairs;
  for (int a = 0; a < n; ++a) {
    for (int b = a + 1; b <= n; ++b) pairs.push_back({T * a / n, T * b / n});
  }
  return pairs;
}

// Envelope exponents tried for estimates (1)-(3), ascending; all <= 1/4 so the
// scaled image sums never overflow.
constexpr int kExponentCount = 16;
double exponent_candidate(int k) { return (k + 1) / 64.0; }

EstimateFit fit_gaussian_envelope(int id, Quantity q, double time_power,
                                  const std::vector<TimePair>& pairs, int n_space) {
  std::array<double, kExponentCount> best{};
  long samples = 0;
  const int npairs = static_cast<int>(pairs.size());
#pragma omp parallel
  {
    std::array<double, kExponentCount> local{};
    long local_samples = 0;
#pragma omp for schedule(dynamic)
    for (int p = 0; p < npairs; ++p) {
      const double tau = pairs[p].t - pairs[p].s;
      for (int ix = 0; ix < n_space; ++ix) {
        const double x = static_cast<double>(ix) / (n_space - 1);
        for (int iy = 0; iy < n_space; ++iy) {
          const double y = static_cast<double>(iy) / (n_space - 1);
          ++local_samples;
          const double scaled = std::abs(scaled_image_sum(q, tau, x, y));
          if (scaled == 0.0) continue;
          const double r2 = (x - y) * (x - y);
          const double base = std::log(scaled) + time_power * std::log(tau);
          for (int k = 0; k < kExponentCount; ++k) {
            const double log_ratio = base + (exponent_candidate(k) - 0.25) * r2 / tau;
            local[k] = std::max(local[k], std::exp(log_ratio));
          }
        }
      }
    }
#pragma omp critical
    {
      for (int k = 0; k < kExponentCount; ++k) best[k] = std::max(best[k], local[k]);
      samples += local_samples;
    }
  }
  // Largest exponent whose constant stays within twice the weakest envelope's.
  int chosen = 0;
  for (int k = 1; k < kExponentCount; ++k) {
    if (std::isfinite(best[k]) && best[k] <= 2.0 * best[0]) chosen = k;
  }
  EstimateFit fit;
  fit.id = id;
  fit.fitted_exponent = exponent_candidate(chosen);
  fit.fitted_K = best[chosen];
  fit.max_ratio = best[chosen];
  fit.samples = samples;
  fit.pass = std::isfinite(fit.fitted_K);
  return fit;
}

EstimateFit fit_holder(const std::vector<TimePair>& pairs, const BoundSampling& sampling) {
  const int modes = sampling.holder_modes;
  const int n_space = sampling.n_space;
  std::vector<double> sines(static_cast<std::size_t>(n_space) * modes);
  for (int ix = 0; ix < n_space; ++ix) {
    const double x = static_cast<double>(ix) / (n_space - 1);
    for (int k = 1; k <= modes; ++k) sines[ix * modes + k - 1] = std::sin(k * kPi * x);
  }
  double best = 0.0;
  long samples = 0;
  const int npairs = static_cast<int>(pairs.size());
#pragma omp parallel for schedule(dynamic) reduction(max : best) reduction(+ : samples)
  for (int p = 0; p < npairs; ++p) {
    const double s = pairs[p].s;
    const double t = pairs[p].t;
    std::vector<double> e_xx(modes), e_xy(modes), e_yy(modes);
    for (int k = 1; k <= modes; ++k) {
      const double lam = k * k * kPi * kPi;
      e_xx[k - 1] = (std::exp(-2.0 * lam * (t - s)) - std::exp(-2.0 * lam * t) -
                     std::expm1(-2.0 * lam * (t - s))) / (2.0 * lam);
      e_xy[k - 1] = -2.0 * (std::exp(-lam * (t - s)) - std::exp(-lam * (t + s))) / (2.0 * lam);
      e_yy[k - 1] = -std::expm1(-2.0 * lam * s) / (2.0 * lam);
    }
    for (int ix = 0; ix < n_space; ++ix) {
      const double* sx = &sines[ix * modes];
      const double x = static_cast<double>(ix) / (n_space - 1);
      for (int iy = 0; iy < n_space; ++iy) {
        const double* sy = &sines[iy * modes];
        const double y = static_cast<double>(iy) / (n_space - 1);
        double sum = 0.0;
        for (int k = 0; k < modes; ++k) {
          sum += sx[k] * sx[k] * e_xx[k] + sx[k] * sy[k] * e_xy[k] + sy[k] * sy[k] * e_yy[k];
        }
        const double rho2 = (t - s) * (t - s) + (x - y) * (x - y);
        const double ratio = 2.0 * sum / std::pow(rho2, sampling.alpha);
        best = std::max(best, ratio);
        ++samples;
      }
    }
  }
  EstimateFit fit;
  fit.id = 4;
  fit.fitted_K = best;
  fit.fitted_exponent = sampling.alpha;
  fit.max_ratio = best;
  fit.samples = samples;
  const double alpha_bar = (sampling.gamma - sampling.dim) / (2.0 * sampling.gamma);
  fit.pass = std::isfinite(best) && sampling.gamma > sampling.dim && sampling.alpha < alpha_bar;
  return fit;
}

}  // namespace

KernelBoundReport check_kernel_bounds(const KernelConfig& cfg, const BoundSampling& sampling) {
  if (sampling.n_time < 16 || sampling.n_space < 16) {
    throw ValidationError("check_kernel_bounds: need at least 16 samples per axis");
  }
  if (sampling.holder_modes < 1) throw ValidationError("check_kernel_bounds: holder_modes must be >= 1");
  const HeatKernel kernel(cfg);
  const auto pairs = time_pairs(kernel.config().T, sampling.n_time);
  KernelBoundReport report;
  report.fits[0] = fit_gaussian_envelope(1, Quantity::value, 1.0, pairs, sampling.n_space);
  report.fits[1] = fit_gaussian_envelope(2, Quantity::d_dx, 1.5, pairs, sampling.n_space);
  report.fits[2] = fit_gaussian_envelope(3, Quantity::d_dt, 2.0, pairs, sampling.n_space);
  report.fits[3] = fit_holder(pairs, sampling);
  report.pass = std::all_of(report.fits.begin(), report.fits.end(), [](const EstimateFit& f) { return f.pass; });
  return report;
}

std::string to_csv(const KernelBoundReport& report) {
  std::ostringstream out;
  out.precision(17);
  out << "estimate_id,fitted_K,fitted_exponent,max_ratio,pass\n";
  for (const auto& f : report.fits) {
    out << f.id << ',' << f.fitted_K << ',' << f.fitted_exponent << ',' << f.max_ratio << ','
        << (f.pass ? "true" : "false") << '\n';
  }
  return out.str();
}

}  // namespace spde::kernel
