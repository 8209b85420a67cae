#include "spde/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace spde {

void SolveConfig::validate() const {
  if (!(epsilon >= 0.0) || !std::isfinite(epsilon)) throw ValidationError("solve: epsilon must be >= 0");
  if (truncation_level && !(*truncation_level >= 1.0)) {
    throw ValidationError("solve: truncation level must be >= 1");
  }
  if (!(max_sup_l2 > 0.0)) throw ValidationError("solve: max_sup_l2 must be > 0");
}

namespace detail {

ImplicitDiffusion::ImplicitDiffusion(const GridSpec& grid)
    : inv_pivot_(static_cast<std::size_t>(grid.nx)), upper_(static_cast<std::size_t>(grid.nx)) {
  const double dx = grid.dx();
  const double ratio = grid.dt() / (dx * dx);
  off_implicit_ = -grid.theta * ratio;
  off_explicit_ = (1.0 - grid.theta) * ratio;
  diag_explicit_ = 1.0 - 2.0 * off_explicit_;
  const double diag = 1.0 + 2.0 * grid.theta * ratio;
  double prev_upper = 0.0;
  for (std::size_t i = 0; i < inv_pivot_.size(); ++i) {
    const double pivot = diag - off_implicit_ * prev_upper;
    inv_pivot_[i] = 1.0 / pivot;
    upper_[i] = off_implicit_ * inv_pivot_[i];
    prev_upper = upper_[i];
  }
}

void ImplicitDiffusion::solve_in_place(std::span<double> rhs) const {
  const std::size_t n = rhs.size();
  rhs[0] *= inv_pivot_[0];
  for (std::size_t i = 1; i < n; ++i) rhs[i] = (rhs[i] - off_implicit_ * rhs[i - 1]) * inv_pivot_[i];
  for (std::size_t i = n - 1; i-- > 0;) rhs[i] -= upper_[i] * rhs[i + 1];
}

void ImplicitDiffusion::apply_explicit(std::span<const double> u, std::span<double> out) const {
  const std::size_t n = u.size();
  for (std::size_t i = 0; i < n; ++i) {
    const double left = i > 0 ? u[i - 1] : 0.0;
    const double right = i + 1 < n ? u[i + 1] : 0.0;
    out[i] = diag_explicit_ * u[i] + off_explicit_ * (left + right);
  }
}

}  // namespace detail

namespace {

double truncated(double value, double r, const std::optional<double>& level) {
  if (!level || std::abs(r) <= *level) return value;
  return truncation_weight(r, *level) * value;
}

}  // namespace

Trajectory integrate(std::span<const double> eta, const Coefficients& c, const GridSpec& grid,
                     const SolveConfig& cfg, const Control* control, const SheetIncrements* sheet) {
  grid.validate();
  cfg.validate();
  const int nx = grid.nx;
  if (eta.size() != static_cast<std::size_t>(nx)) {
    throw ValidationError("solve: initial condition has " + std::to_string(eta.size()) +
                          " entries, grid has " + std::to_string(nx));
  }
  if (cfg.epsilon > 0.0 && sheet == nullptr) throw ValidationError("solve: epsilon > 0 requires a sheet");
  if (cfg.epsilon == 0.0 && sheet != nullptr) throw ValidationError("solve: sheet given with epsilon = 0");
  if (sheet && (sheet->increments.rows() != static_cast<std::size_t>(grid.nt) ||
                sheet->increments.cols() != static_cast<std::size_t>(nx))) {
    throw ValidationError("solve: sheet shape does not match grid");
  }
  if (control) check_shape(*control, grid, "solve");

  const double dx = grid.dx();
  const double dt = grid.dt();
  const double noise_scale = cfg.epsilon > 0.0 ? std::sqrt(cfg.epsilon) / dx : 0.0;
  const double half_inv_dx = 0.5 / dx;
  const detail::ImplicitDiffusion diffusion(grid);

  Trajectory traj{grid, Field2D(grid.nt + 1, nx), 0.0, std::nullopt};
  std::copy(eta.begin(), eta.end(), traj.values.row(0).begin());
  traj.sup_l2 = l2_norm(traj.row(0), dx);

  std::vector<double> g_field(nx + 2), rhs(nx);
  for (int j = 0; j < grid.nt; ++j) {
    const double t = grid.t(j);
    const auto u = traj.values.row(j);
    g_field[0] = truncated(c.g(t, 0.0, 0.0), 0.0, cfg.truncation_level);
    g_field[nx + 1] = truncated(c.g(t, 1.0, 0.0), 0.0, cfg.truncation_level);
    for (int i = 0; i < nx; ++i) g_field[i + 1] = truncated(c.g(t, grid.x(i), u[i]), u[i], cfg.truncation_level);

    diffusion.apply_explicit(u, rhs);
    for (int i = 0; i < nx; ++i) {
      const double x = grid.x(i);
      const double r = u[i];
      double drift = truncated(c.f.value(t, x, r), r, cfg.truncation_level) +
                     (g_field[i + 2] - g_field[i]) * half_inv_dx;
      const double sigma = c.sigma.value(t, x, r);
      if (control) drift += sigma * control->values()(j, i);
      rhs[i] += dt * drift;
      if (sheet) rhs[i] += noise_scale * sigma * sheet->increments(j, i);
    }
    diffusion.solve_in_place(rhs);

    auto next = traj.values.row(j + 1);
    std::copy(rhs.begin(), rhs.end(), next.begin());
    const double norm = l2_norm(next, dx);
    if (!std::isfinite(norm) || norm > cfg.max_sup_l2) {
      traj.blowup_step = j + 1;
      for (int jj = j + 1; jj <= grid.nt; ++jj) {
        for (double& v : traj.values.row(jj)) v = std::numeric_limits<double>::quiet_NaN();
      }
      traj.sup_l2 = std::numeric_limits<double>::infinity();
      return traj;
    }
    traj.sup_l2 = std::max(traj.sup_l2, norm);
  }
  return traj;
}

Trajectory solve(std::span<const double> eta, const Coefficients& c, const GridSpec& grid,
                 const SolveConfig& cfg, const Control* control, const SheetIncrements* sheet) {
  Trajectory traj = integrate(eta, c, grid, cfg, control, sheet);
  if (traj.blowup_step) {
    throw BlowUpError("solve: blow-up at step " + std::to_string(*traj.blowup_step), *traj.blowup_step);
  }
  return traj;
}

Trajectory solve_skeleton(std::span<const double> eta, const Coefficients& c, const GridSpec& grid,
                          const Control& control) {
  return solve(eta, c, grid, SolveConfig{}, &control, nullptr);
}

double l2_norm(std::span<const double> u, double dx) {
  double s = 0.0;
  for (double v : u) s += v * v;
  return std::sqrt(s * dx);
}

double c0l2_distance(const Trajectory& a, const Trajectory& b) {
  if (!(a.grid == b.grid)) throw ValidationError("c0l2_distance: grids differ");
  const double dx = a.grid.dx();
  double worst = 0.0;
  for (int j = 0; j <= a.grid.nt; ++j) {
    const auto ra = a.row(j);
    const auto rb = b.row(j);
    double s = 0.0;
    for (std::size_t i = 0; i < ra.size(); ++i) s += (ra[i] - rb[i]) * (ra[i] - rb[i]);
    worst = std::max(worst, std::sqrt(s * dx));
  }
  return worst;
}

double sup_l2(const Trajectory& a) {
  double worst = 0.0;
  for (std::size_t j = 0; j < a.values.rows(); ++j) {
    worst = std::max(worst, l2_norm(a.values.row(j), a.grid.dx()));
  }
  return worst;
}

std::vector<double> sample_profile(const GridSpec& grid, const std::function<double(double)>& fn) {
  std::vector<double> u(static_cast<std::size_t>(grid.nx));
  for (int i = 0; i < grid.nx; ++i) u[i] = fn(grid.x(i));
  return u;
}

}  // namespace spde
