#include "spde/rate.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <sstream>

namespace spde {

void TargetSpec::validate(const GridSpec& grid) const {
  if (!(penalty_weight > 0.0)) throw ValidationError("target: penalty weight must be > 0");
  if (profile.size() != static_cast<std::size_t>(grid.nx)) {
    throw ValidationError("target: profile has " + std::to_string(profile.size()) + " entries, grid has " +
                          std::to_string(grid.nx));
  }
  if (!std::isfinite(level)) throw ValidationError("target: level must be finite");
  if (!(tolerance > 0.0)) throw ValidationError("target: tolerance must be > 0");
}

RateResult evaluate_rate_direct(std::span<const double> eta, const Coefficients& c, const Trajectory& h,
                                const GridSpec& grid) {
  if (!(c.sigma_min > 0.0)) {
    throw UnsupportedDegeneracy("evaluate_rate_direct: requires sigma_min > 0 (got " +
                                std::to_string(c.sigma_min) + ")");
  }
  grid.validate();
  if (!(h.grid == grid)) throw ValidationError("evaluate_rate_direct: trajectory grid differs");
  if (eta.size() != static_cast<std::size_t>(grid.nx)) {
    throw ValidationError("evaluate_rate_direct: initial condition length mismatch");
  }
  const auto first = h.row(0);
  for (int i = 0; i < grid.nx; ++i) {
    if (first[i] != eta[i]) throw ValidationError("evaluate_rate_direct: trajectory does not start at eta");
  }

  const int nx = grid.nx;
  const double dx = grid.dx();
  const double dt = grid.dt();
  const double lap = 1.0 / (dx * dx);
  const double theta = grid.theta;
  const auto laplacian = [&](std::span<const double> u, int i) {
    const double left = i > 0 ? u[i - 1] : 0.0;
    const double right = i + 1 < nx ? u[i + 1] : 0.0;
    return (left - 2.0 * u[i] + right) * lap;
  };

  Field2D v(grid.nt, nx);
  std::vector<double> g_field(nx + 2);
  for (int j = 0; j < grid.nt; ++j) {
    const double t = grid.t(j);
    const auto u = h.row(j);
    const auto w = h.row(j + 1);
    g_field[0] = c.g(t, 0.0, 0.0);
    g_field[nx + 1] = c.g(t, 1.0, 0.0);
    for (int i = 0; i < nx; ++i) g_field[i + 1] = c.g(t, grid.x(i), u[i]);
    for (int i = 0; i < nx; ++i) {
      const double x = grid.x(i);
      const double residual = (w[i] - u[i]) / dt - theta * laplacian(w, i) - (1.0 - theta) * laplacian(u, i) -
                              (g_field[i + 2] - g_field[i]) * (0.5 / dx) - c.f.value(t, x, u[i]);
      v(j, i) = residual / c.sigma.value(t, x, u[i]);
    }
  }
  RateResult result;
  result.control = Control(grid, std::move(v));
  result.value = 0.5 * result.control.norm_sq();
  result.converged = true;
  return result;
}

TerminalPenalty terminal_penalty(const TargetSpec& target, std::span<const double> terminal, double dx) {
  TerminalPenalty out;
  out.d_du.assign(terminal.size(), 0.0);
  const double mu = target.penalty_weight;
  if (target.kind == TargetSpec::Kind::terminal_projection) {
    double projection = 0.0;
    for (std::size_t i = 0; i < terminal.size(); ++i) projection += terminal[i] * target.profile[i];
    projection *= dx;
    const double deficit = std::max(0.0, target.level - projection);
    out.violation = deficit;
    out.penalty = 0.5 * mu * deficit * deficit;
    for (std::size_t i = 0; i < terminal.size(); ++i) out.d_du[i] = -mu * deficit * target.profile[i] * dx;
  } else {
    double sq = 0.0;
    for (std::size_t i = 0; i < terminal.size(); ++i) {
      const double diff = terminal[i] - target.profile[i];
      sq += diff * diff;
      out.d_du[i] = mu * diff * dx;
    }
    sq *= dx;
    out.violation = std::sqrt(sq);
    out.penalty = 0.5 * mu * sq;
  }
  return out;
}

ObjectiveEval evaluate_objective(const Control& v, std::span<const double> eta, const Coefficients& c,
                                 const GridSpec& grid, const TargetSpec& target) {
  target.validate(grid);
  const Trajectory h = solve_skeleton(eta, c, grid, v);
  const int nx = grid.nx;
  const double dx = grid.dx();
  const double dt = grid.dt();
  const detail::ImplicitDiffusion diffusion(grid);

  TerminalPenalty term = terminal_penalty(target, h.terminal(), dx);
  ObjectiveEval out;
  out.action = 0.5 * v.norm_sq();
  out.penalty = term.penalty;
  out.violation = term.violation;
  out.objective = out.action + out.penalty;

  // Backward sweep: p holds dJ/dU^{j+1}; lambda = A^{-1} p (A symmetric).
  Field2D grad = v.values();
  std::vector<double> p = std::move(term.d_du);
  std::vector<double> lambda(nx), next_p(nx);
  const double half_inv_dx = 0.5 / dx;
  for (int j = grid.nt - 1; j >= 0; --j) {
    const double t = grid.t(j);
    const auto u = h.row(j);
    std::copy(p.begin(), p.end(), lambda.begin());
    diffusion.solve_in_place(lambda);
    diffusion.apply_explicit(lambda, next_p);
    const auto vj = v.values().row(j);
    auto gj = grad.row(j);
    for (int i = 0; i < nx; ++i) {
      const double x = grid.x(i);
      const double r = u[i];
      gj[i] += c.sigma.value(t, x, r) * lambda[i] / dx;
      const double left = i > 0 ? lambda[i - 1] : 0.0;
      const double right = i + 1 < nx ? lambda[i + 1] : 0.0;
      const double transport_adjoint = (left - right) * half_inv_dx;
      next_p[i] += dt * (c.f.d_dr(t, x, r) * lambda[i] + c.dg(t, x, r) * transport_adjoint +
                         c.sigma.d_dr(t, x, r) * vj[i] * lambda[i]);
    }
    p.swap(next_p);
  }
  out.gradient = Control(grid, std::move(grad));
  return out;
}

Control adjoint_gradient(const Control& v, std::span<const double> eta, const Coefficients& c,
                         const GridSpec& grid, const TargetSpec& target) {
  return evaluate_objective(v, eta, c, grid, target).gradient;
}

namespace {

// Flat-vector helpers in the dx*dt weighted inner product.
struct Space {
  double weight;
  double dot(std::span<const double> a, std::span<const double> b) const {
    double s = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
    return s * weight;
  }
};

std::vector<double> flat_copy(const Control& c) {
  const auto f = c.values().flat();
  return {f.begin(), f.end()};
}

Control to_control(const GridSpec& grid, std::span<const double> flat) {
  Field2D values(grid.nt, grid.nx);
  std::copy(flat.begin(), flat.end(), values.flat().begin());
  return Control(grid, std::move(values));
}

struct Pair {
  std::vector<double> s;
  std::vector<double> y;
  double rho;
};

// Two-loop recursion: returns -H g.
std::vector<double> lbfgs_direction(const std::deque<Pair>& history, std::span<const double> g, const Space& sp) {
  std::vector<double> q(g.begin(), g.end());
  std::vector<double> alpha(history.size());
  for (std::size_t k = history.size(); k-- > 0;) {
    alpha[k] = history[k].rho * sp.dot(history[k].s, q);
    for (std::size_t i = 0; i < q.size(); ++i) q[i] -= alpha[k] * history[k].y[i];
  }
  if (!history.empty()) {
    const auto& last = history.back();
    const double gamma = sp.dot(last.s, last.y) / sp.dot(last.y, last.y);
    for (double& x : q) x *= gamma;
  }
  for (std::size_t k = 0; k < history.size(); ++k) {
    const double beta = history[k].rho * sp.dot(history[k].y, q);
    for (std::size_t i = 0; i < q.size(); ++i) q[i] += (alpha[k] - beta) * history[k].s[i];
  }
  for (double& x : q) x = -x;
  return q;
}

}  // namespace

RateResult minimize_rate(std::span<const double> eta, const Coefficients& c, const GridSpec& grid,
                         const TargetSpec& target, const OptimizerSettings& settings) {
  target.validate(grid);
  const Space sp{grid.dx() * grid.dt()};
  TargetSpec stage = target;
  Control v = Control::zero(grid);
  ObjectiveEval current = evaluate_objective(v, eta, c, grid, stage);
  int total_iterations = 0;
  double grad_norm = 0.0;
  bool grad_ok = false;

  while (true) {
    std::deque<Pair> history;
    std::vector<double> x = flat_copy(v);
    std::vector<double> g = flat_copy(current.gradient);
    grad_ok = false;
    for (int it = 0; it < settings.max_iterations; ++it) {
      grad_norm = std::sqrt(sp.dot(g, g));
      if (grad_norm <= settings.grad_tol * (1.0 + std::sqrt(v.norm_sq()))) {
        grad_ok = true;
        break;
      }
      std::vector<double> d = lbfgs_direction(history, g, sp);
      double slope = sp.dot(g, d);
      if (!(slope < 0.0)) {
        history.clear();
        d = lbfgs_direction(history, g, sp);
        slope = sp.dot(g, d);
      }
      if (history.empty()) {
        // Unscaled steepest descent: start with a unit-length step.
        const double scale = std::min(1.0, 1.0 / grad_norm);
        for (double& di : d) di *= scale;
        slope *= scale;
      }
      double step = 1.0;
      bool accepted = false;
      std::vector<double> trial(x.size());
      ObjectiveEval next;
      Control trial_control;
      for (int bt = 0; bt < 60; ++bt) {
        for (std::size_t k = 0; k < x.size(); ++k) trial[k] = x[k] + step * d[k];
        trial_control = to_control(grid, trial);
        next = evaluate_objective(trial_control, eta, c, grid, stage);
        if (std::isfinite(next.objective) &&
            next.objective <= current.objective + settings.armijo * step * slope) {
          accepted = true;
          break;
        }
        step *= 0.5;
      }
      ++total_iterations;
      if (!accepted) break;
      std::vector<double> g_new = flat_copy(next.gradient);
      Pair pair{std::vector<double>(x.size()), std::vector<double>(x.size()), 0.0};
      for (std::size_t k = 0; k < x.size(); ++k) {
        pair.s[k] = trial[k] - x[k];
        pair.y[k] = g_new[k] - g[k];
      }
      const double sy = sp.dot(pair.s, pair.y);
      if (sy > 1e-300) {
        pair.rho = 1.0 / sy;
        history.push_back(std::move(pair));
        if (static_cast<int>(history.size()) > settings.history) history.pop_front();
      }
      x.swap(trial);
      g.swap(g_new);
      v = std::move(trial_control);
      current = std::move(next);
    }
    grad_norm = std::sqrt(sp.dot(g, g));
    if (current.violation <= target.tolerance) break;
    if (stage.penalty_weight >= settings.mu_max) break;
    stage.penalty_weight = std::min(settings.mu_max, stage.penalty_weight * settings.mu_growth);
    current = evaluate_objective(v, eta, c, grid, stage);
  }

  RateResult result;
  result.value = 0.5 * v.norm_sq();
  result.control = std::move(v);
  result.iterations = total_iterations;
  result.grad_norm = grad_norm;
  result.constraint_violation = current.violation;
  result.penalty_weight = stage.penalty_weight;
  result.converged = grad_ok && current.violation <= target.tolerance;
  return result;
}

std::string rate_csv_header() { return "value,iterations,grad_norm,converged"; }

std::string rate_csv_row(const RateResult& r) {
  std::ostringstream out;
  out.precision(17);
  out << r.value << ',' << r.iterations << ',' << r.grad_norm << ',' << (r.converged ? "true" : "false");
  return out.str();
}

}  // namespace spde
