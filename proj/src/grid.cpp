#include "spde/grid.hpp"

#include <cmath>
#include <numbers>

#include "spde/rng.hpp"

namespace spde {

void GridSpec::validate() const {
  if (nx < 2) throw ValidationError("grid: nx must be >= 2");
  if (nt < 1) throw ValidationError("grid: nt must be >= 1");
  if (!(T > 0.0) || !std::isfinite(T)) throw ValidationError("grid: T must be a positive finite time");
  if (!(theta >= 0.0 && theta <= 1.0)) throw ValidationError("grid: theta must lie in [0,1]");
}

GridSpec GridSpec::refined(int time_factor) const {
  GridSpec g = *this;
  g.nx = 2 * nx + 1;
  g.nt = nt * time_factor;
  return g;
}

Control::Control(const GridSpec& grid, Field2D values)
    : values_(std::move(values)), dx_(grid.dx()), dt_(grid.dt()) {
  grid.validate();
  if (values_.rows() != static_cast<std::size_t>(grid.nt) ||
      values_.cols() != static_cast<std::size_t>(grid.nx)) {
    throw ValidationError("control: values must be nt x nx");
  }
  double s = 0.0;
  for (double v : values_.flat()) s += v * v;
  norm_sq_ = s * dx_ * dt_;
}

Control Control::zero(const GridSpec& grid) {
  return Control(grid, Field2D(grid.nt, grid.nx));
}

Control Control::from_function(const GridSpec& grid,
                               const std::function<double(double, double)>& fn) {
  Field2D values(grid.nt, grid.nx);
  for (int j = 0; j < grid.nt; ++j) {
    const double t = grid.t_mid(j);
    for (int i = 0; i < grid.nx; ++i) values(j, i) = fn(t, grid.x(i));
  }
  return Control(grid, std::move(values));
}

void check_shape(const Control& v, const GridSpec& grid, const std::string& what) {
  if (v.nt() != grid.nt || v.nx() != grid.nx) {
    throw ValidationError(what + ": control shape " + std::to_string(v.nt()) + "x" +
                          std::to_string(v.nx()) + " does not match grid " +
                          std::to_string(grid.nt) + "x" + std::to_string(grid.nx));
  }
}

SheetIncrements sample_sheet(const GridSpec& grid, std::uint64_t seed) {
  grid.validate();
  SheetIncrements sheet{seed, Field2D(grid.nt, grid.nx)};
  const double scale = std::sqrt(grid.dt() * grid.dx());
  const std::uint64_t pairs_per_row = (static_cast<std::uint64_t>(grid.nx) + 1) / 2;
  for (int j = 0; j < grid.nt; ++j) {
    auto row = sheet.increments.row(j);
    for (std::uint64_t p = 0; p < pairs_per_row; ++p) {
      const auto [z0, z1] = rng::normal_pair(seed, static_cast<std::uint64_t>(j) * pairs_per_row + p);
      row[2 * p] = scale * z0;
      if (2 * p + 1 < row.size()) row[2 * p + 1] = scale * z1;
    }
  }
  return sheet;
}

double control_norm_sq(const Control& v, const GridSpec& grid) {
  check_shape(v, grid, "control_norm_sq");
  double s = 0.0;
  for (double x : v.values().flat()) s += x * x;
  return s * grid.dx() * grid.dt();
}

Field2D int_v(const Control& v, const GridSpec& grid) {
  check_shape(v, grid, "int_v");
  const double cell = grid.dx() * grid.dt();
  Field2D out(grid.nt + 1, grid.nx + 2);
  for (int j = 0; j < grid.nt; ++j) {
    double running = 0.0;
    for (int m = 1; m <= grid.nx + 1; ++m) {
      if (m <= grid.nx) running += v.values()(j, m - 1);
      out(j + 1, m) = out(j, m) + running * cell;
    }
  }
  return out;
}

Control oscillatory_family(const Control& v, const GridSpec& grid, int n, double amplitude) {
  check_shape(v, grid, "oscillatory_family");
  if (n < 1) throw ValidationError("oscillatory_family: n must be >= 1");
  Field2D values = v.values();
  for (int j = 0; j < grid.nt; ++j) {
    const double bump = amplitude * std::sin(n * std::numbers::pi * grid.t_mid(j) / grid.T);
    for (double& x : values.row(j)) x += bump;
  }
  return Control(grid, std::move(values));
}

double control_inner(const Control& v, const Control& w) {
  if (v.nt() != w.nt() || v.nx() != w.nx()) throw ValidationError("control_inner: shape mismatch");
  const auto a = v.values().flat();
  const auto b = w.values().flat();
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
  return s * v.dx() * v.dt();
}

}  // namespace spde
