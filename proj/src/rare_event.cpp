#include "spde/rare_event.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "spde/reduce.hpp"
#include "spde/rng.hpp"

namespace spde {

void EventSpec::validate(const GridSpec& grid) const {
  if (kind == Kind::terminal_projection_geq && profile.size() != static_cast<std::size_t>(grid.nx)) {
    throw ValidationError("event: profile has " + std::to_string(profile.size()) + " entries, grid has " +
                          std::to_string(grid.nx));
  }
  if (!std::isfinite(level)) throw ValidationError("event: level must be finite");
}

bool EventSpec::occurred(const Trajectory& u) const {
  const double dx = u.grid.dx();
  switch (kind) {
    case Kind::terminal_projection_geq: {
      const auto terminal = u.terminal();
      double s = 0.0;
      for (std::size_t i = 0; i < terminal.size(); ++i) s += terminal[i] * profile[i];
      return s * dx >= level;
    }
    case Kind::terminal_l2_geq:
      return l2_norm(u.terminal(), dx) >= level;
    case Kind::sup_l2_geq:
      return u.sup_l2 >= level;
  }
  return false;
}

std::string method_name(Method m) { return m == Method::plain ? "plain" : "tilted"; }

double log_likelihood_weight(const Control& v, const SheetIncrements& sheet, double epsilon) {
  if (!(epsilon > 0.0)) throw std::domain_error("likelihood_weight: epsilon must be > 0");
  const auto a = v.values().flat();
  const auto b = sheet.increments.flat();
  if (a.size() != b.size() || v.nt() != static_cast<int>(sheet.increments.rows())) {
    throw ValidationError("likelihood_weight: control and sheet shapes differ");
  }
  double pairing = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) pairing += a[k] * b[k];
  return -pairing / std::sqrt(epsilon) - v.norm_sq() / (2.0 * epsilon);
}

double likelihood_weight(const Control& v, const SheetIncrements& sheet, double epsilon) {
  return std::exp(log_likelihood_weight(v, sheet, epsilon));
}

namespace {

struct SampleOutcome {
  double value = 0.0;  // indicator times weight
  bool hit = false;
  bool excluded = false;
};

struct McProblem {
  const EventSpec& event;
  std::span<const double> eta;
  const Coefficients& c;
  const GridSpec& grid;
  double epsilon;
  std::uint64_t master_seed;
  const Control* tilt;
  SolveConfig solve_cfg;
};

SampleOutcome run_sample(const McProblem& prob, long index) {
  const SheetIncrements sheet = sample_sheet(prob.grid, rng::derive_seed(prob.master_seed, static_cast<std::uint64_t>(index)));
  const Trajectory traj = integrate(prob.eta, prob.c, prob.grid, prob.solve_cfg, prob.tilt, &sheet);
  SampleOutcome out;
  if (traj.blowup_step) {
    out.excluded = true;
    return out;
  }
  out.hit = prob.event.occurred(traj);
  if (out.hit) out.value = prob.tilt ? likelihood_weight(*prob.tilt, sheet, prob.epsilon) : 1.0;
  return out;
}

McProblem make_problem(const EventSpec& event, std::span<const double> eta, const Coefficients& c,
                       const GridSpec& grid, double epsilon, long n, std::uint64_t master_seed,
                       const Control* tilt, const MCOptions& options) {
  if (!(epsilon > 0.0)) throw std::domain_error("estimate_probability: epsilon must be > 0");
  if (n < 1) throw ValidationError("estimate_probability: n must be >= 1");
  grid.validate();
  event.validate(grid);
  if (eta.size() != static_cast<std::size_t>(grid.nx)) {
    throw ValidationError("estimate_probability: initial condition length mismatch");
  }
  if (tilt) check_shape(*tilt, grid, "estimate_probability");
  SolveConfig cfg;
  cfg.epsilon = epsilon;
  cfg.truncation_level = options.truncation_level;
  cfg.max_sup_l2 = options.max_sup_l2;
  return McProblem{event, eta, c, grid, epsilon, master_seed, tilt, cfg};
}

MCEstimate summarize(const std::vector<SampleOutcome>& outcomes, const McProblem& prob, long n,
                     const MCOptions& options) {
  std::vector<double> used;
  used.reserve(outcomes.size());
  long hits = 0, excluded = 0;
  for (const auto& o : outcomes) {
    if (o.excluded) {
      ++excluded;
      continue;
    }
    hits += o.hit ? 1 : 0;
    used.push_back(o.value);
  }
  if (static_cast<double>(excluded) > options.max_excluded_fraction * static_cast<double>(n)) {
    throw ExcessiveBlowUp("estimate_probability: " + std::to_string(excluded) + " of " + std::to_string(n) +
                          " samples blew up");
  }
  MCEstimate est;
  est.n = n;
  est.excluded = excluded;
  est.hits = hits;
  est.epsilon = prob.epsilon;
  est.method = prob.tilt ? Method::tilted : Method::plain;
  est.master_seed = prob.master_seed;
  if (used.empty()) return est;
  const double m = static_cast<double>(used.size());
  est.p_hat = pairwise_sum(used) / m;
  if (used.size() > 1) {
    std::vector<double> sq(used.size());
    for (std::size_t k = 0; k < used.size(); ++k) sq[k] = (used[k] - est.p_hat) * (used[k] - est.p_hat);
    est.std_error = std::sqrt(pairwise_sum(sq) / (m - 1.0) / m);
  }
  return est;
}

}  // namespace

MCEstimate estimate_probability(const EventSpec& event, std::span<const double> eta, const Coefficients& c,
                                const GridSpec& grid, double epsilon, long n, std::uint64_t master_seed,
                                const Control* tilt, const MCOptions& options) {
  const McProblem prob = make_problem(event, eta, c, grid, epsilon, n, master_seed, tilt, options);
  std::vector<SampleOutcome> outcomes(static_cast<std::size_t>(n));
  const int threads = options.threads > 0 ? options.threads : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic, 64) num_threads(threads)
  for (long k = 0; k < n; ++k) outcomes[k] = run_sample(prob, k);
  return summarize(outcomes, prob, n, options);
}

namespace reference {
MCEstimate estimate_probability(const EventSpec& event, std::span<const double> eta, const Coefficients& c,
                                const GridSpec& grid, double epsilon, long n, std::uint64_t master_seed,
                                const Control* tilt, const MCOptions& options) {
  const McProblem prob = make_problem(event, eta, c, grid, epsilon, n, master_seed, tilt, options);
  std::vector<SampleOutcome> outcomes(static_cast<std::size_t>(n));
  for (long k = 0; k < n; ++k) outcomes[k] = run_sample(prob, k);
  return summarize(outcomes, prob, n, options);
}
}  // namespace reference

double gaussian_tail(double z) { return 0.5 * std::erfc(z / std::numbers::sqrt2); }

std::optional<std::pair<double, double>> linear_projection_law(const Coefficients& c, const GridSpec& grid,
                                                               std::span<const double> eta,
                                                               std::span<const double> profile) {
  if (c.name != "linear_heat") return std::nullopt;
  const double dx = grid.dx();
  const double pi = std::numbers::pi;
  // Mean: <P_T eta, profile> with the exact sine-mode decay.
  double mean = 0.0;
  double variance = 0.0;
  for (int k = 1; k <= grid.nx; ++k) {
    double eta_k = 0.0, phi_k = 0.0;
    for (int i = 0; i < grid.nx; ++i) {
      const double mode = std::numbers::sqrt2 * std::sin(k * pi * grid.x(i));
      eta_k += eta[i] * mode;
      phi_k += profile[i] * mode;
    }
    eta_k *= dx;
    phi_k *= dx;
    const double lam = k * k * pi * pi;
    mean += std::exp(-lam * grid.T) * eta_k * phi_k;
    variance += phi_k * phi_k * (-std::expm1(-2.0 * lam * grid.T)) / (2.0 * lam);
  }
  return std::make_pair(mean, std::sqrt(variance));
}

LDPReport ldp_curve(const EventSpec& event, std::span<const double> eta, const Coefficients& c,
                    const GridSpec& grid, std::span<const double> epsilons, long n, std::uint64_t master_seed,
                    const LDPOptions& options) {
  event.validate(grid);
  for (std::size_t k = 0; k < epsilons.size(); ++k) {
    if (!(epsilons[k] > 0.0)) throw ValidationError("ldp_curve: epsilons must be positive");
    if (k > 0 && !(epsilons[k] < epsilons[k - 1])) throw ValidationError("ldp_curve: epsilons must decrease");
  }
  LDPReport report;
  std::optional<std::pair<double, double>> law;
  if (event.kind == EventSpec::Kind::terminal_projection_geq) {
    TargetSpec target;
    target.kind = TargetSpec::Kind::terminal_projection;
    target.profile = event.profile;
    target.level = event.level;
    target.tolerance = options.target_tolerance;
    report.minimizer = minimize_rate(eta, c, grid, target, options.optimizer);
    report.reference_rate = report.minimizer.value;
    law = linear_projection_law(c, grid, eta, event.profile);
    if (law) {
      const double gap = std::max(0.0, event.level - law->first);
      report.oracle_rate = gap * gap / (2.0 * law->second * law->second);
    }
  } else {
    report.reference_rate = std::numeric_limits<double>::quiet_NaN();
  }

  for (std::size_t k = 0; k < epsilons.size(); ++k) {
    const double eps = epsilons[k];
    const bool tilt = event.kind == EventSpec::Kind::terminal_projection_geq &&
                      (options.policy == TiltPolicy::tilted ||
                       (options.policy == TiltPolicy::automatic && eps < options.tilt_below_epsilon));
    LDPRow row;
    row.epsilon = eps;
    row.estimate = estimate_probability(event, eta, c, grid, eps, n, rng::hash2(master_seed, k), tilt ? &report.minimizer.control : nullptr,
                                        options.mc);
    const double p = row.estimate.p_hat;
    const double se = row.estimate.std_error;
    const double inf = std::numeric_limits<double>::infinity();
    row.minus_eps_log_p = p > 0.0 ? -eps * std::log(p) : inf;
    if (row.minus_eps_log_p == 0.0) row.minus_eps_log_p = 0.0;  // no negative zero in output
    row.ci_low = -eps * std::log(p + 1.96 * se);
    row.ci_high = p - 1.96 * se > 0.0 ? -eps * std::log(p - 1.96 * se) : inf;
    if (law) {
      const double tail = gaussian_tail((event.level - law->first) / (std::sqrt(eps) * law->second));
      row.oracle_minus_eps_log_p = -eps * std::log(tail);
    }
    report.rows.push_back(row);
  }
  return report;
}

std::vector<A2Row> a2_experiment(const EtaFamily& eta_family, const ControlFamily& v_family,
                                 const Control& v_limit, std::span<const double> eta, const Coefficients& c,
                                 const GridSpec& grid, std::span<const double> epsilons,
                                 std::span<const std::uint64_t> seeds, const MCOptions& options) {
  if (seeds.empty()) throw ValidationError("a2_experiment: need at least one seed");
  const Trajectory limit = solve_skeleton(eta, c, grid, v_limit);
  std::vector<A2Row> rows;
  for (const double eps : epsilons) {
    if (!(eps > 0.0)) throw ValidationError("a2_experiment: epsilons must be positive");
    const std::vector<double> eta_eps = eta_family(eps);
    const Control v_eps = v_family(eps);
    SolveConfig cfg;
    cfg.epsilon = eps;
    cfg.truncation_level = options.truncation_level;
    cfg.max_sup_l2 = options.max_sup_l2;
    const int count = static_cast<int>(seeds.size());
    std::vector<double> dist(count, std::numeric_limits<double>::quiet_NaN());
    const int threads = options.threads > 0 ? options.threads : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic) num_threads(threads)
    for (int s = 0; s < count; ++s) {
      const SheetIncrements sheet = sample_sheet(grid, seeds[s]);
      const Trajectory traj = integrate(eta_eps, c, grid, cfg, &v_eps, &sheet);
      if (!traj.blowup_step) dist[s] = c0l2_distance(traj, limit);
    }
    std::vector<double> used;
    for (double d : dist) {
      if (!std::isnan(d)) used.push_back(d);
    }
    A2Row row;
    row.epsilon = eps;
    row.samples = static_cast<int>(used.size());
    row.excluded = count - row.samples;
    if (!used.empty()) {
      row.mean_distance = pairwise_sum(used) / used.size();
      if (used.size() > 1) {
        std::vector<double> sq(used.size());
        for (std::size_t k = 0; k < used.size(); ++k) sq[k] = (used[k] - row.mean_distance) * (used[k] - row.mean_distance);
        row.std_distance = std::sqrt(pairwise_sum(sq) / (used.size() - 1.0));
      }
    }
    rows.push_back(row);
  }
  return rows;
}

std::vector<A1Row> a1_experiment(std::span<const double> eta, const Coefficients& c, const GridSpec& grid,
                                 const Control& v, std::span<const int> n_list, double amplitude) {
  for (std::size_t k = 1; k < n_list.size(); ++k) {
    if (n_list[k] <= n_list[k - 1]) throw ValidationError("a1_experiment: n_list must increase");
  }
  const Trajectory base = solve_skeleton(eta, c, grid, v);
  std::vector<A1Row> rows;
  for (const int n : n_list) {
    const Control vn = oscillatory_family(v, grid, n, amplitude);
    rows.push_back({n, c0l2_distance(solve_skeleton(eta, c, grid, vn), base), vn.norm_sq()});
  }
  return rows;
}

double loglog_slope(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw ValidationError("loglog_slope: need >= 2 matching points");
  double mx = 0.0, my = 0.0;
  const double n = static_cast<double>(x.size());
  for (std::size_t k = 0; k < x.size(); ++k) {
    mx += std::log(x[k]);
    my += std::log(y[k]);
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double dx = std::log(x[k]) - mx;
    sxy += dx * (std::log(y[k]) - my);
    sxx += dx * dx;
  }
  return sxy / sxx;
}

}  // namespace spde
