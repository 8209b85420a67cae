#pragma once

#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "spde/grid.hpp"
#include "spde/models.hpp"

namespace spde {

/// Noise level and safeguards for one solve.
struct SolveConfig {
  double epsilon = 0.0;
  /// Cutoff level n for f and g (f_n = f for |r| <= n, 0 for |r| >= n+1).
  std::optional<double> truncation_level;
  double max_sup_l2 = 1e6;

  void validate() const;
};

/// Discretized field U(t_j, x_i), j = 0..nt, interior nodes only (the
/// Dirichlet boundary values are identically zero and not stored).
struct Trajectory {
  GridSpec grid;
  Field2D values;  // (nt+1) x nx
  double sup_l2 = 0.0;
  std::optional<int> blowup_step;

  std::span<const double> row(int j) const { return values.row(static_cast<std::size_t>(j)); }
  std::span<const double> terminal() const { return row(grid.nt); }
};

/// Raised when a solve produces a non-finite value or exceeds max_sup_l2.
class BlowUpError : public std::runtime_error {
 public:
  BlowUpError(const std::string& what, int step) : std::runtime_error(what), step_(step) {}
  int step() const { return step_; }

 private:
  int step_;
};

/// Time-steps the controlled equation
///   (I - theta dt Lap) U^{j+1} = (I + (1-theta) dt Lap) U^j
///       + dt [f(t_j, U^j) + sigma(t_j, U^j) v_j] + dt D[g(t_j, U^j)]
///       + sqrt(eps) sigma(t_j, U^j) dW_j / dx
/// where Lap is the Dirichlet second difference and D the centered first
/// difference of the field g (boundary values g(t, 0, 0), g(t, 1, 0)).
/// `control` may be null (v = 0); `sheet` must be non-null iff epsilon > 0.
/// Never throws on blow-up: the returned trajectory carries blowup_step and
/// rows after it are NaN.
Trajectory integrate(std::span<const double> eta, const Coefficients& c, const GridSpec& grid,
                     const SolveConfig& cfg, const Control* control, const SheetIncrements* sheet);

/// As integrate, but throws BlowUpError on blow-up.
Trajectory solve(std::span<const double> eta, const Coefficients& c, const GridSpec& grid,
                 const SolveConfig& cfg, const Control* control = nullptr,
                 const SheetIncrements* sheet = nullptr);

/// Zero-noise controlled equation: solve with epsilon = 0 and no sheet.
Trajectory solve_skeleton(std::span<const double> eta, const Coefficients& c, const GridSpec& grid,
                          const Control& control);

/// Discrete L2 norm sqrt(sum u_i^2 dx).
double l2_norm(std::span<const double> u, double dx);

/// max_j |a(t_j) - b(t_j)|_2.
double c0l2_distance(const Trajectory& a, const Trajectory& b);

/// max_j |a(t_j)|_2.
double sup_l2(const Trajectory& a);

/// Samples fn at the interior nodes.
std::vector<double> sample_profile(const GridSpec& grid, const std::function<double(double)>& fn);

namespace detail {

/// Constant tridiagonal system (I - theta dt Lap) with a cached Thomas factorization.
class ImplicitDiffusion {
 public:
  explicit ImplicitDiffusion(const GridSpec& grid);
  /// Overwrites rhs with the solution.
  void solve_in_place(std::span<double> rhs) const;
  /// out = (I + (1-theta) dt Lap) u.
  void apply_explicit(std::span<const double> u, std::span<double> out) const;

 private:
  double off_implicit_;
  double off_explicit_;
  double diag_explicit_;
  std::vector<double> inv_pivot_;
  std::vector<double> upper_;
};

}  // namespace detail

}  // namespace spde
