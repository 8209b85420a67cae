#pragma once

#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "spde/grid.hpp"
#include "spde/models.hpp"
#include "spde/solver.hpp"

namespace spde {

/// Raised for rate evaluations that would need 1/sigma with sigma_min <= 0.
class UnsupportedDegeneracy : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Action 1/2 |v|^2 of a control together with optimizer diagnostics.
struct RateResult {
  double value = 0.0;
  Control control;
  int iterations = 0;
  double grad_norm = 0.0;
  bool converged = false;
  double constraint_violation = 0.0;
  double penalty_weight = 0.0;
};

/// Terminal condition that a skeleton trajectory must meet.
///
/// terminal_projection: <h(T), profile> >= level (one-sided, so a target
/// already met by the uncontrolled skeleton costs nothing).
/// terminal_field: h(T) = profile in L2.
struct TargetSpec {
  enum class Kind { terminal_projection, terminal_field };
  Kind kind = Kind::terminal_projection;
  std::vector<double> profile;
  double level = 0.0;
  double penalty_weight = 1.0;
  double tolerance = 1e-4;

  void validate(const GridSpec& grid) const;
};

/// Recovers the unique control that drives the scheme along h and returns its
/// action. The residual of the time step is divided by sigma(t_j, h^j).
RateResult evaluate_rate_direct(std::span<const double> eta, const Coefficients& c,
                                const Trajectory& h, const GridSpec& grid);

/// J(v) = 1/2 |v|^2 + penalty(h_v(T)) with its exact discrete gradient.
struct ObjectiveEval {
  double objective = 0.0;
  double action = 0.0;
  double penalty = 0.0;
  double violation = 0.0;
  Control gradient;  // L2 (dx dt weighted) gradient
};

/// Penalty value, violation and dPenalty/dU (plain partial derivatives) at a terminal field.
struct TerminalPenalty {
  double penalty = 0.0;
  double violation = 0.0;
  std::vector<double> d_du;
};
TerminalPenalty terminal_penalty(const TargetSpec& target, std::span<const double> terminal, double dx);

/// Forward skeleton solve plus backward adjoint sweep of the same time step.
ObjectiveEval evaluate_objective(const Control& v, std::span<const double> eta, const Coefficients& c,
                                 const GridSpec& grid, const TargetSpec& target);

/// L2 gradient of J at v.
Control adjoint_gradient(const Control& v, std::span<const double> eta, const Coefficients& c,
                         const GridSpec& grid, const TargetSpec& target);

struct OptimizerSettings {
  int max_iterations = 400;  // per penalty stage
  int history = 12;          // L-BFGS memory
  double grad_tol = 1e-7;    // relative to 1 + |v|
  double mu_growth = 10.0;
  double mu_max = 1e10;
  double armijo = 1e-4;
};

/// Minimizes 1/2 |v|^2 subject to the target by L-BFGS on the penalized
/// objective, raising the penalty weight until the violation is within
/// target.tolerance. The returned value excludes the penalty.
RateResult minimize_rate(std::span<const double> eta, const Coefficients& c, const GridSpec& grid,
                         const TargetSpec& target, const OptimizerSettings& settings = {});

/// CSV header/row: value,iterations,grad_norm,converged.
std::string rate_csv_header();
std::string rate_csv_row(const RateResult& r);

}  // namespace spde
