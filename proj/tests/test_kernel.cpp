#include <doctest.h>

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "spde/kernel.hpp"

using namespace spde;
using namespace spde::kernel;

namespace {

constexpr double pi = std::numbers::pi;

// Free-space Gaussian; images are below 1e-300 for t = 1e-4 away from the walls.
double free_gaussian(double t, double x, double y) {
  return std::exp(-(x - y) * (x - y) / (4.0 * t)) / std::sqrt(4.0 * pi * t);
}

}  // namespace

TEST_CASE("single mode dominates for large t") {
  const double t = 2.0;
  for (double x : {0.1, 0.37, 0.5, 0.92}) {
    for (double y : {0.2, 0.5, 0.77}) {
      const double first = 2.0 * std::exp(-pi * pi * t) * std::sin(pi * x) * std::sin(pi * y);
      CHECK(eval_G(t, x, y) == doctest::Approx(first).epsilon(1e-12));
    }
  }
}

TEST_CASE("short times match the free Gaussian in the interior") {
  const double t = 1e-4;
  for (double x : {0.3, 0.5, 0.6}) {
    for (double y : {0.31, 0.5, 0.55}) {
      CHECK(eval_G(t, x, y) == doctest::Approx(free_gaussian(t, x, y)).epsilon(1e-12));
    }
  }
}

TEST_CASE("spectral and image sums agree across the switch time") {
  for (double t : {1e-3, 0.01, 0.05, 0.2, 1.0}) {
    for (double x : {0.0, 0.13, 0.5, 0.99}) {
      for (double y : {0.02, 0.4, 0.8}) {
        for (Quantity q : {Quantity::value, Quantity::d_dx, Quantity::d_dy, Quantity::d_dt}) {
          const double a = spectral_sum(q, t, x, y);
          const double b = image_sum(q, t, x, y);
          CHECK(std::abs(a - b) <= 1e-9 * (1.0 + std::abs(a)));
        }
      }
    }
  }
}

TEST_CASE("kernel is symmetric and vanishes on the boundary") {
  const HeatKernel k;
  for (double t : {1e-3, 0.04, 0.3}) {
    for (double x : {0.1, 0.45, 0.8}) {
      for (double y : {0.2, 0.6}) CHECK(k.G(t, x, y) == doctest::Approx(k.G(t, y, x)).epsilon(1e-13));
      CHECK(k.G(t, 0.0, x) == 0.0);
      CHECK(k.G(t, 1.0, x) == 0.0);
    }
  }
}

TEST_CASE("derivatives match finite differences and the heat equation") {
  const HeatKernel k;
  const double h = 1e-5;
  for (double t : {0.02, 0.1, 0.5}) {
    for (double x : {0.25, 0.6}) {
      const double y = 0.4;
      const double fdx = (k.G(t, x + h, y) - k.G(t, x - h, y)) / (2 * h);
      const double fdy = (k.G(t, x, y + h) - k.G(t, x, y - h)) / (2 * h);
      const double fdt = (k.G(t + h, x, y) - k.G(t - h, x, y)) / (2 * h);
      const double h2 = 1e-4;
      const double lap = (k.G(t, x + h2, y) - 2 * k.G(t, x, y) + k.G(t, x - h2, y)) / (h2 * h2);
      const double scale = 1.0 + std::abs(k.dGdt(t, x, y));
      CHECK(std::abs(k.dGdx(t, x, y) - fdx) <= 1e-6 * (1.0 + std::abs(fdx)));
      CHECK(std::abs(k.dGdy(t, x, y) - fdy) <= 1e-6 * (1.0 + std::abs(fdy)));
      CHECK(std::abs(k.dGdt(t, x, y) - fdt) <= 1e-5 * scale);
      CHECK(std::abs(k.dGdt(t, x, y) - lap) <= 1e-3 * scale);
    }
  }
}

TEST_CASE("invalid evaluation points") {
  CHECK_THROWS_AS(eval_G(0.0, 0.5, 0.5), std::domain_error);
  CHECK_THROWS_AS(eval_G(-1.0, 0.5, 0.5), std::domain_error);
  CHECK_THROWS_AS(eval_G(0.1, 1.5, 0.5), std::domain_error);
  CHECK_THROWS_AS(eval_dGdy(0.1, 0.5, -0.1), std::domain_error);
}

TEST_CASE("too few terms for the tolerance is rejected") {
  KernelConfig cfg;
  cfg.k_max = 2;
  CHECK_THROWS_AS(HeatKernel{cfg}, ValidationError);
  KernelConfig img;
  img.image_count = 1;
  img.t_switch = 0.9;
  CHECK_THROWS_AS(HeatKernel{img}, ValidationError);
}

TEST_CASE("semigroup acts diagonally on sine modes") {
  GridSpec g;
  g.nx = 63;
  for (int k : {1, 3, 10}) {
    std::vector<double> u(g.nx);
    for (int i = 0; i < g.nx; ++i) u[i] = std::sin(k * pi * g.x(i));
    const double t = 0.013;
    const auto out = apply_semigroup(u, t, g);
    for (int i = 0; i < g.nx; ++i) CHECK(out[i] == doctest::Approx(std::exp(-k * k * pi * pi * t) * u[i]).epsilon(1e-10));
  }
  std::vector<double> u(g.nx, 0.7);
  const auto same = apply_semigroup(u, 0.0, g);
  CHECK(same == u);
}

TEST_CASE("semigroup keeps resolved nonnegative data nonnegative") {
  GridSpec g;
  g.nx = 127;
  for (double c : {0.2, 0.5, 0.9}) {
    std::vector<double> u(g.nx);
    for (int i = 0; i < g.nx; ++i) u[i] = std::exp(-std::pow((g.x(i) - c) / 0.08, 2)) * std::sin(pi * g.x(i));
    for (double t : {1e-4, 1e-2, 0.3}) {
      const auto out = apply_semigroup(u, t, g);
      for (double v : out) CHECK(v >= -1e-12);
    }
  }
}

TEST_CASE("Chapman-Kolmogorov identity") {
  CHECK(semigroup_identity_error(0.01, 0.02, 128) < 1e-8);
  CHECK(semigroup_identity_error(0.3, 0.1, 128) < 1e-8);
}

TEST_CASE("bound certificate passes with finite constants") {
  const KernelBoundReport r = check_kernel_bounds(KernelConfig{}, BoundSampling{16, 16, 0.2, 2.0, 1.0, 400});
  CHECK(r.pass);
  for (const auto& f : r.fits) {
    CHECK(std::isfinite(f.fitted_K));
    CHECK(f.fitted_K > 0.0);
    CHECK(f.samples > 0);
  }
  // Hoelder estimate uses exponent (gamma - d) / (2 gamma) for gamma = 2, d = 1.
  CHECK(r.fits[3].fitted_exponent == doctest::Approx(0.2));
  const std::string csv = to_csv(r);
  CHECK(csv.rfind("estimate_id,fitted_K,fitted_exponent,max_ratio,pass\n", 0) == 0);
  CHECK_THROWS_AS(check_kernel_bounds(KernelConfig{}, BoundSampling{8, 16}), ValidationError);
}

TEST_CASE("Hoelder integral against direct quadrature in time") {
  // Per mode, the z-integral of the squared difference is 2 a_k(r)^2 with
  // a_k(r) = e^{-lam (t-r)} sin(k pi x) - [r < s] e^{-lam (s-r)} sin(k pi y).
  const double s = 0.3, t = 0.5, x = 0.3, y = 0.4;
  const int modes = 12;
  auto integrand = [&](double r, bool before) {
    double sum = 0.0;
    for (int k = 1; k <= modes; ++k) {
      const double lam = k * k * pi * pi;
      double a = std::exp(-lam * (t - r)) * std::sin(k * pi * x);
      if (before) a -= std::exp(-lam * (s - r)) * std::sin(k * pi * y);
      sum += 2.0 * a * a;
    }
    return sum;
  };
  auto simpson = [&](double a, double b, int n, bool before) {
    const double h = (b - a) / n;
    double acc = integrand(a, before) + integrand(b, before);
    for (int i = 1; i < n; ++i) acc += (i % 2 ? 4.0 : 2.0) * integrand(a + i * h, before);
    return acc * h / 3.0;
  };
  const double oracle = simpson(0.0, s, 20000, true) + simpson(s, t, 20000, false);
  CHECK(holder_integral(s, t, x, y, modes) == doctest::Approx(oracle).epsilon(1e-9));
  CHECK(holder_integral(0.2, 0.2001, 0.5, 0.5, 500) < holder_integral(0.2, 0.3, 0.5, 0.5, 500));
  CHECK_THROWS_AS(holder_integral(0.5, 0.5, 0.1, 0.2, 10), std::domain_error);
}
