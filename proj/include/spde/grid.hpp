#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace spde {

/// Raised when inputs have inconsistent shapes or invalid parameters.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Uniform discretization of [0,T] x [0,1].
///
/// Interior nodes x_i = (i+1)*dx for i = 0..nx-1; the Dirichlet boundary
/// nodes x = 0 and x = 1 are implicit. Time levels t_j = j*dt, j = 0..nt.
/// `theta` weights the implicit part of the diffusion in the time step
/// (1 = backward Euler, 1/2 = Crank-Nicolson).
struct GridSpec {
  int nx = 63;
  int nt = 200;
  double T = 1.0;
  double theta = 0.6;

  double dx() const { return 1.0 / static_cast<double>(nx + 1); }
  double dt() const { return T / static_cast<double>(nt); }
  double x(int i) const { return static_cast<double>(i + 1) * dx(); }
  double t(int j) const { return static_cast<double>(j) * dt(); }
  double t_mid(int j) const { return (static_cast<double>(j) + 0.5) * dt(); }

  /// Throws ValidationError unless nx >= 2, nt >= 1, T > 0, theta in [0,1].
  void validate() const;

  /// Same grid with dx halved (nx -> 2nx+1) and nt multiplied by `time_factor`.
  GridSpec refined(int time_factor) const;

  bool operator==(const GridSpec&) const = default;
};

/// Dense row-major 2D array.
class Field2D {
 public:
  Field2D() = default;
  Field2D(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

  std::span<double> flat() { return data_; }
  std::span<const double> flat() const { return data_; }

  bool operator==(const Field2D&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

/// Brownian-sheet rectangle increments on the grid cells: entry (j, i) is the
/// sheet mass of [t_j, t_{j+1}) x (cell of node i), variance dt*dx.
struct SheetIncrements {
  std::uint64_t seed = 0;
  Field2D increments;  // nt x nx
};

/// Cell-constant control v(t, x) on the grid: value (j, i) holds on
/// [t_j, t_{j+1}) at node x_i. The squared L2 norm is cached at construction.
class Control {
 public:
  Control() = default;
  Control(const GridSpec& grid, Field2D values);

  static Control zero(const GridSpec& grid);
  /// Samples fn(t, x) at time midpoints t_mid(j) and nodes x(i).
  static Control from_function(const GridSpec& grid,
                               const std::function<double(double, double)>& fn);

  const Field2D& values() const { return values_; }
  int nt() const { return static_cast<int>(values_.rows()); }
  int nx() const { return static_cast<int>(values_.cols()); }

  /// Cached sum of v^2 dx dt.
  double norm_sq() const { return norm_sq_; }
  bool in_ball(double radius_sq) const { return norm_sq_ <= radius_sq; }

  double dx() const { return dx_; }
  double dt() const { return dt_; }

 private:
  Field2D values_;
  double dx_ = 0.0;
  double dt_ = 0.0;
  double norm_sq_ = 0.0;
};

/// Independent N(0, dt*dx) increments; entry (j, i) is a pure function of
/// (seed, j, i).
SheetIncrements sample_sheet(const GridSpec& grid, std::uint64_t seed);

/// Midpoint-rule value of the integral of v^2 over [0,T] x [0,1].
double control_norm_sq(const Control& v, const GridSpec& grid);

/// Int(v)(t_j, x_m) = integral of v over [0, t_j] x [0, x_m], as a
/// (nt+1) x (nx+2) table; column m is x = m*dx, so columns 0 and nx+1 are the
/// boundary nodes.
Field2D int_v(const Control& v, const GridSpec& grid);

/// v + amplitude * sin(n pi t / T), evaluated at time midpoints. Converges
/// weakly (not strongly) to v as n grows.
Control oscillatory_family(const Control& v, const GridSpec& grid, int n, double amplitude);

/// Discrete pairing sum v(j,i) * w(j,i) * dx * dt.
double control_inner(const Control& v, const Control& w);

/// Throws ValidationError when the control's shape differs from the grid's.
void check_shape(const Control& v, const GridSpec& grid, const std::string& what);

}  // namespace spde
