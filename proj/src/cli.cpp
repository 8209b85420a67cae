#include "spde/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <numbers>
#include <sstream>

#include <omp.h>

#include "spde/config.hpp"
#include "spde/io.hpp"
#include "spde/kernel.hpp"
#include "spde/rare_event.hpp"
#include "spde/rate.hpp"
#include "spde/rng.hpp"
#include "spde/solver.hpp"

#ifndef SPDE_GIT_DESCRIBE
#define SPDE_GIT_DESCRIBE "unknown"
#endif

namespace spde::cli {
namespace {

namespace fs = std::filesystem;
using io::format_double;

const std::map<std::string, std::string> kHeaders{
    {"kernel-check", "estimate_id,fitted_K,fitted_exponent,max_ratio,pass"},
    {"simulate", "t,x,value"},
    {"skeleton", "t,x,value"},
    {"rate-eval", "value,iterations,grad_norm,converged"},
    {"rate-min", "value,iterations,grad_norm,converged"},
    {"mc", "p_hat,std_error,n,excluded,hits,epsilon,method,master_seed"},
    {"ldp", "epsilon,p_hat,std_error,hits,method,minus_eps_log_p,ci_low,ci_high,oracle_minus_eps_log_p,reference_rate,oracle_rate"},
    {"a1", "n,distance,control_norm_sq"},
    {"a2", "epsilon,mean_distance,std_distance,samples,excluded"},
};

/// Non-convergence and failed numerical checks.
class NumericalFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string fmt_opt(const std::optional<double>& v) { return v ? format_double(*v) : ""; }

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::ostringstream ss;
  ss << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return ss.str();
}

void write_manifest(const fs::path& dir, const std::string& sub, const RunConfig& cfg) {
  const std::string canon = cfg.canonical();
  nlohmann::json m;
  m["subcommand"] = sub;
  m["config_hash"] = io::fnv1a_hex(canon);
  m["master_seed"] = cfg.seed;
  m["seed_rule"] = "sample k uses derive_seed(master_seed, k); ldp row r uses hash2(master_seed, r)";
  m["grid"] = {{"nx", cfg.grid.nx}, {"nt", cfg.grid.nt}, {"T", cfg.grid.T}, {"theta", cfg.grid.theta}};
  m["preset"] = preset_name(cfg.preset);
  m["threads"] = cfg.threads;
  m["git_describe"] = SPDE_GIT_DESCRIBE;
  m["timestamp"] = utc_timestamp();
  m["config"] = canon;
  std::ofstream out(dir / "manifest.jsonl", std::ios::app);
  if (!out) throw ValidationError("cannot write " + (dir / "manifest.jsonl").string());
  out << m.dump() << '\n';
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ValidationError("cannot write " + path.string());
  out << text;
}

std::string trajectory_csv(const Trajectory& u) {
  std::ostringstream ss;
  io::write_trajectory_csv(ss, u);
  return ss.str();
}

std::string kernel_check(const RunConfig& cfg, const fs::path& dir, std::ostream& out) {
  const kernel::KernelBoundReport report = kernel::check_kernel_bounds(kernel::KernelConfig{}, cfg.kernel_sampling);

  // Spectral and image forms on a 32^3 design, t log-spaced in [1e-4, 1].
  double cross = 0.0;
  for (int a = 0; a < 32; ++a) {
    const double t = std::pow(10.0, -4.0 + 4.0 * a / 31.0);
    for (int b = 0; b < 32; ++b) {
      for (int d = 0; d < 32; ++d) {
        const double x = b / 31.0;
        const double y = d / 31.0;
        const double s = kernel::spectral_sum(kernel::Quantity::value, t, x, y);
        const double m = kernel::image_sum(kernel::Quantity::value, t, x, y);
        cross = std::max(cross, std::abs(s - m));
      }
    }
  }
  std::ostringstream id;
  id << "check,value,tolerance,pass\n";
  bool ok = report.pass;
  auto line = [&](const std::string& name, double v, double tol) {
    const bool pass = v < tol;
    ok = ok && pass;
    id << name << ',' << format_double(v) << ',' << format_double(tol) << ',' << (pass ? "true" : "false") << '\n';
  };
  line("cross_form", cross, 1e-10);
  const std::pair<double, double> pairs[] = {{0.01, 0.02}, {0.05, 0.1}, {0.2, 0.3}};
  for (const auto& [s, t] : pairs) {
    line("chapman_kolmogorov_s" + format_double(s) + "_t" + format_double(t),
         kernel::semigroup_identity_error(s, t, cfg.kernel_nx), 1e-8);
  }
  write_text(dir / "identities.csv", id.str());
  out << "kernel bounds " << (report.pass ? "pass" : "fail") << ", cross-form max diff " << cross << '\n';
  if (!ok) {
    write_text(dir / "results.csv", kernel::to_csv(report));
    throw NumericalFailure("kernel-check: a bound or identity failed (see results.csv, identities.csv)");
  }
  return kernel::to_csv(report);
}

std::string simulate(const RunConfig& cfg) {
  const auto eta = cfg.eta();
  const Coefficients c = cfg.coefficients();
  const Control v = cfg.control();
  if (cfg.solve.epsilon > 0.0) {
    const SheetIncrements sheet = sample_sheet(cfg.grid, rng::derive_seed(cfg.seed, 0));
    return trajectory_csv(solve(eta, c, cfg.grid, cfg.solve, &v, &sheet));
  }
  return trajectory_csv(solve(eta, c, cfg.grid, cfg.solve, &v, nullptr));
}

std::string skeleton(const RunConfig& cfg) {
  return trajectory_csv(solve_skeleton(cfg.eta(), cfg.coefficients(), cfg.grid, cfg.control()));
}

std::string rate_eval(const RunConfig& cfg) {
  const auto eta = cfg.eta();
  const Coefficients c = cfg.coefficients();
  Trajectory h;
  if (cfg.rate_path == "skeleton") {
    h = solve_skeleton(eta, c, cfg.grid, cfg.control());
  } else {
    h.grid = cfg.grid;
    h.values = Field2D(cfg.grid.nt + 1, cfg.grid.nx);
    for (int j = 0; j <= cfg.grid.nt; ++j) {
      for (int i = 0; i < cfg.grid.nx; ++i) h.values(j, i) = cfg.grid.t(j) * std::sin(std::numbers::pi * cfg.grid.x(i));
    }
  }
  const RateResult r = evaluate_rate_direct(eta, c, h, cfg.grid);
  return rate_csv_header() + "\n" + rate_csv_row(r) + "\n";
}

std::string rate_min(const RunConfig& cfg, const fs::path& dir) {
  const RateResult r = minimize_rate(cfg.eta(), cfg.coefficients(), cfg.grid, cfg.target(), cfg.optimizer);
  std::ostringstream ctl;
  io::write_csv(ctl, io::from_control(r.control, cfg.grid));
  write_text(dir / "control.csv", ctl.str());
  const std::string csv = rate_csv_header() + "\n" + rate_csv_row(r) + "\n";
  if (!r.converged) {
    write_text(dir / "results.csv", csv);
    throw NumericalFailure("rate-min: optimizer did not converge (violation " + format_double(r.constraint_violation) + ")");
  }
  return csv;
}

std::string mc(const RunConfig& cfg) {
  if (!(cfg.solve.epsilon > 0.0)) throw ValidationError("mc: solve.epsilon must be > 0");
  const auto eta = cfg.eta();
  const Coefficients c = cfg.coefficients();
  const EventSpec event = cfg.event();
  std::optional<Control> tilt;
  if (cfg.method == "tilted") {
    if (event.kind != EventSpec::Kind::terminal_projection_geq) {
      throw ValidationError("mc: tilting needs event.kind = terminal_projection");
    }
    tilt = minimize_rate(eta, c, cfg.grid, cfg.target(), cfg.optimizer).control;
  }
  const MCEstimate e = estimate_probability(event, eta, c, cfg.grid, cfg.solve.epsilon, cfg.samples, cfg.seed,
                                            tilt ? &*tilt : nullptr, cfg.mc_options());
  std::ostringstream ss;
  ss << kHeaders.at("mc") << '\n'
     << format_double(e.p_hat) << ',' << format_double(e.std_error) << ',' << e.n << ',' << e.excluded << ',' << e.hits
     << ',' << format_double(e.epsilon) << ',' << method_name(e.method) << ',' << e.master_seed << '\n';
  return ss.str();
}

std::string ldp(const RunConfig& cfg) {
  LDPOptions opt;
  opt.policy = cfg.policy == "plain" ? TiltPolicy::plain : cfg.policy == "tilted" ? TiltPolicy::tilted : TiltPolicy::automatic;
  opt.optimizer = cfg.optimizer;
  opt.target_tolerance = cfg.target_tolerance;
  opt.mc = cfg.mc_options();
  const LDPReport rep = ldp_curve(cfg.event(), cfg.eta(), cfg.coefficients(), cfg.grid, cfg.epsilons, cfg.samples,
                                  cfg.seed, opt);
  std::ostringstream ss;
  ss << kHeaders.at("ldp") << '\n';
  for (const LDPRow& r : rep.rows) {
    ss << format_double(r.epsilon) << ',' << format_double(r.estimate.p_hat) << ',' << format_double(r.estimate.std_error)
       << ',' << r.estimate.hits << ',' << method_name(r.estimate.method) << ',' << format_double(r.minus_eps_log_p) << ','
       << format_double(r.ci_low) << ',' << format_double(r.ci_high) << ',' << fmt_opt(r.oracle_minus_eps_log_p) << ','
       << format_double(rep.reference_rate) << ',' << fmt_opt(rep.oracle_rate) << '\n';
  }
  return ss.str();
}

std::string a1(const RunConfig& cfg) {
  const auto rows = a1_experiment(cfg.eta(), cfg.coefficients(), cfg.grid, cfg.control(), cfg.a1_n, cfg.a1_amplitude);
  std::ostringstream ss;
  ss << kHeaders.at("a1") << '\n';
  for (const A1Row& r : rows) ss << r.n << ',' << format_double(r.distance) << ',' << format_double(r.control_norm_sq) << '\n';
  return ss.str();
}

std::string a2(const RunConfig& cfg) {
  const auto eta = cfg.eta();
  const Control v = cfg.control();
  std::vector<std::uint64_t> seeds(cfg.a2_seeds);
  for (int k = 0; k < cfg.a2_seeds; ++k) seeds[k] = rng::derive_seed(cfg.seed, k);
  const GridSpec grid = cfg.grid;
  const double amp = cfg.control_amplitude;
  ControlFamily family = [v](double) { return v; };
  if (cfg.a2_family == "oscillatory") {
    family = [v, grid, amp](double eps) {
      return oscillatory_family(v, grid, static_cast<int>(std::ceil(1.0 / eps)), amp);
    };
  }
  const auto rows = a2_experiment([eta](double) { return eta; }, family, v, eta, cfg.coefficients(), grid,
                                  cfg.epsilons, seeds, cfg.mc_options());
  std::ostringstream ss;
  ss << kHeaders.at("a2") << '\n';
  for (const A2Row& r : rows) {
    ss << format_double(r.epsilon) << ',' << format_double(r.mean_distance) << ',' << format_double(r.std_distance) << ','
       << r.samples << ',' << r.excluded << '\n';
  }
  return ss.str();
}

}  // namespace

std::string results_header(const std::string& subcommand) {
  const auto it = kHeaders.find(subcommand);
  if (it == kHeaders.end()) throw ValidationError("unknown subcommand " + subcommand);
  return it->second;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Small-noise SPDE lab on [0,1]"};
  app.require_subcommand(1);
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  std::optional<std::string> out_dir;
  std::vector<std::string> sets;
  app.add_option("--config", config_path, "key = value config file");
  app.add_option("--seed", seed, "master seed (run.seed)");
  app.add_option("--threads", threads, "worker cap, 0 = OpenMP default (run.threads)");
  app.add_option("--out", out_dir, "output directory (run.out)");
  app.add_option("--set", sets, "override, e.g. --set grid.nx=127")->take_all();
  app.fallthrough();
  for (const auto& [name, header] : kHeaders) app.add_subcommand(name);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return ok;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return validation_error;
  }
  const std::string sub = app.get_subcommands().front()->get_name();

  RunConfig cfg;
  try {
    if (!config_path.empty()) cfg = load_config(config_path);
    KeyValues kv;
    for (const auto& s : sets) {
      const auto eq = s.find('=');
      if (eq == std::string::npos) throw ValidationError("--set expects key=value, got " + s);
      kv[s.substr(0, eq)] = s.substr(eq + 1);
    }
    if (seed) kv["run.seed"] = std::to_string(*seed);
    if (threads) kv["run.threads"] = std::to_string(*threads);
    if (out_dir) kv["run.out"] = *out_dir;
    cfg.apply(kv);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return validation_error;
  }

  const fs::path dir(cfg.out);
  try {
    fs::create_directories(dir);
    write_manifest(dir, sub, cfg);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return validation_error;
  }

  try {
    cfg.validate();
    if (cfg.threads > 0) omp_set_num_threads(cfg.threads);
    std::string csv;
    if (sub == "kernel-check") csv = kernel_check(cfg, dir, out);
    else if (sub == "simulate") csv = simulate(cfg);
    else if (sub == "skeleton") csv = skeleton(cfg);
    else if (sub == "rate-eval") csv = rate_eval(cfg);
    else if (sub == "rate-min") csv = rate_min(cfg, dir);
    else if (sub == "mc") csv = mc(cfg);
    else if (sub == "ldp") csv = ldp(cfg);
    else if (sub == "a1") csv = a1(cfg);
    else csv = a2(cfg);
    write_text(dir / "results.csv", csv);
    out << sub << ": wrote " << (dir / "results.csv").string() << '\n';
    return ok;
  } catch (const ValidationError& e) {
    err << "validation error: " << e.what() << '\n';
    return validation_error;
  } catch (const UnsupportedDegeneracy& e) {
    err << "validation error: " << e.what() << '\n';
    return validation_error;
  } catch (const HypothesisViolation& e) {
    err << "validation error: " << e.what() << '\n';
    return validation_error;
  } catch (const std::domain_error& e) {
    err << "validation error: " << e.what() << '\n';
    return validation_error;
  } catch (const BlowUpError& e) {
    err << "numerical failure: " << e.what() << " (step " << e.step() << ")\n";
    return numerical_failure;
  } catch (const std::exception& e) {
    err << "numerical failure: " << e.what() << '\n';
    return numerical_failure;
  }
}

}  // namespace spde::cli
