#include "spde/config.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <numbers>
#include <sstream>

#include "spde/io.hpp"

namespace spde {
namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& v) {
  std::size_t used = 0;
  double out = 0.0;
  try {
    out = std::stod(v, &used);
  } catch (const std::exception&) {
    throw ValidationError(key + ": expected a number, got '" + v + "'");
  }
  if (used != v.size()) throw ValidationError(key + ": expected a number, got '" + v + "'");
  return out;
}

long to_long(const std::string& key, const std::string& v) {
  std::size_t used = 0;
  long out = 0;
  try {
    out = std::stol(v, &used);
  } catch (const std::exception&) {
    throw ValidationError(key + ": expected an integer, got '" + v + "'");
  }
  if (used != v.size()) throw ValidationError(key + ": expected an integer, got '" + v + "'");
  return out;
}

std::uint64_t to_u64(const std::string& key, const std::string& v) {
  std::size_t used = 0;
  std::uint64_t out = 0;
  try {
    if (!v.empty() && v[0] == '-') throw std::invalid_argument("negative");
    out = std::stoull(v, &used);
  } catch (const std::exception&) {
    throw ValidationError(key + ": expected a non-negative integer, got '" + v + "'");
  }
  if (used != v.size()) throw ValidationError(key + ": expected a non-negative integer, got '" + v + "'");
  return out;
}

std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> parts;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) parts.push_back(item);
  }
  return parts;
}

template <typename T, typename F>
std::string join(const std::vector<T>& xs, F fmt) {
  std::string s;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    if (k) s += ',';
    s += fmt(xs[k]);
  }
  return s;
}

struct Field {
  std::function<void(RunConfig&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

const std::map<std::string, Field>& fields() {
  using io::format_double;
  static const std::map<std::string, Field> table = [] {
    std::map<std::string, Field> t;
    auto real = [&t](const std::string& key, double RunConfig::*member) {
      t[key] = {[key, member](RunConfig& c, const std::string& v) { c.*member = to_double(key, v); },
                [member](const RunConfig& c) { return format_double(c.*member); }};
    };
    auto integer = [&t](const std::string& key, int RunConfig::*member) {
      t[key] = {[key, member](RunConfig& c, const std::string& v) { c.*member = static_cast<int>(to_long(key, v)); },
                [member](const RunConfig& c) { return std::to_string(c.*member); }};
    };
    auto text = [&t](const std::string& key, std::string RunConfig::*member, std::initializer_list<const char*> allowed) {
      std::vector<const char*> keep(allowed);
      t[key] = {[key, member, keep](RunConfig& c, const std::string& v) {
                  bool ok = false;
                  for (const char* a : keep) ok = ok || v == a;
                  if (!ok) {
                    std::string msg = key + ": '" + v + "' is not one of";
                    for (const char* a : keep) msg += std::string(" ") + a;
                    throw ValidationError(msg);
                  }
                  c.*member = v;
                },
                [member](const RunConfig& c) { return c.*member; }};
    };

    t["grid.nx"] = {[](RunConfig& c, const std::string& v) { c.grid.nx = static_cast<int>(to_long("grid.nx", v)); },
                    [](const RunConfig& c) { return std::to_string(c.grid.nx); }};
    t["grid.nt"] = {[](RunConfig& c, const std::string& v) { c.grid.nt = static_cast<int>(to_long("grid.nt", v)); },
                    [](const RunConfig& c) { return std::to_string(c.grid.nt); }};
    t["grid.T"] = {[](RunConfig& c, const std::string& v) { c.grid.T = to_double("grid.T", v); },
                   [](const RunConfig& c) { return format_double(c.grid.T); }};
    t["grid.theta"] = {[](RunConfig& c, const std::string& v) { c.grid.theta = to_double("grid.theta", v); },
                       [](const RunConfig& c) { return format_double(c.grid.theta); }};

    t["model.preset"] = {[](RunConfig& c, const std::string& v) {
                           try {
                             c.preset = parse_preset(v);
                           } catch (const std::exception& e) {
                             throw ValidationError(std::string("model.preset: ") + e.what());
                           }
                         },
                         [](const RunConfig& c) { return preset_name(c.preset); }};
    t["model.reaction_a"] = {[](RunConfig& c, const std::string& v) { c.preset_params.reaction_a = to_double("model.reaction_a", v); },
                             [](const RunConfig& c) { return format_double(c.preset_params.reaction_a); }};
    t["model.sigma_s0"] = {[](RunConfig& c, const std::string& v) { c.preset_params.sigma_s0 = to_double("model.sigma_s0", v); },
                           [](const RunConfig& c) { return format_double(c.preset_params.sigma_s0); }};
    t["model.sigma_s1"] = {[](RunConfig& c, const std::string& v) { c.preset_params.sigma_s1 = to_double("model.sigma_s1", v); },
                           [](const RunConfig& c) { return format_double(c.preset_params.sigma_s1); }};

    t["solve.epsilon"] = {[](RunConfig& c, const std::string& v) { c.solve.epsilon = to_double("solve.epsilon", v); },
                          [](const RunConfig& c) { return format_double(c.solve.epsilon); }};
    t["solve.truncation_level"] = {[](RunConfig& c, const std::string& v) {
                                     if (v == "none") {
                                       c.solve.truncation_level.reset();
                                     } else {
                                       c.solve.truncation_level = to_double("solve.truncation_level", v);
                                     }
                                   },
                                   [](const RunConfig& c) {
                                     return c.solve.truncation_level ? format_double(*c.solve.truncation_level) : "none";
                                   }};
    t["solve.max_sup_l2"] = {[](RunConfig& c, const std::string& v) { c.solve.max_sup_l2 = to_double("solve.max_sup_l2", v); },
                             [](const RunConfig& c) { return format_double(c.solve.max_sup_l2); }};

    real("initial.amplitude", &RunConfig::initial_amplitude);
    integer("initial.mode", &RunConfig::initial_mode);
    t["initial.values"] = {[](RunConfig& c, const std::string& v) {
                             c.initial_values.clear();
                             for (const auto& s : split_list(v)) c.initial_values.push_back(to_double("initial.values", s));
                           },
                           [](const RunConfig& c) { return join(c.initial_values, format_double); }};

    text("control.kind", &RunConfig::control_kind, {"zero", "sine", "constant"});
    real("control.amplitude", &RunConfig::control_amplitude);

    text("event.kind", &RunConfig::event_kind, {"terminal_projection", "terminal_l2", "sup_l2"});
    real("event.level", &RunConfig::event_level);
    integer("event.mode", &RunConfig::profile_mode);

    real("rate.tolerance", &RunConfig::target_tolerance);
    text("rate.path", &RunConfig::rate_path, {"skeleton", "t_sine"});
    t["rate.max_iterations"] = {[](RunConfig& c, const std::string& v) {
                                  c.optimizer.max_iterations = static_cast<int>(to_long("rate.max_iterations", v));
                                },
                                [](const RunConfig& c) { return std::to_string(c.optimizer.max_iterations); }};
    t["rate.grad_tol"] = {[](RunConfig& c, const std::string& v) { c.optimizer.grad_tol = to_double("rate.grad_tol", v); },
                          [](const RunConfig& c) { return format_double(c.optimizer.grad_tol); }};

    t["mc.samples"] = {[](RunConfig& c, const std::string& v) { c.samples = to_long("mc.samples", v); },
                       [](const RunConfig& c) { return std::to_string(c.samples); }};
    text("mc.method", &RunConfig::method, {"plain", "tilted"});
    real("mc.max_excluded_fraction", &RunConfig::max_excluded_fraction);

    t["sweep.epsilons"] = {[](RunConfig& c, const std::string& v) {
                           c.epsilons.clear();
                           for (const auto& s : split_list(v)) c.epsilons.push_back(to_double("sweep.epsilons", s));
                         },
                         [](const RunConfig& c) { return join(c.epsilons, format_double); }};
    text("ldp.policy", &RunConfig::policy, {"plain", "tilted", "automatic"});

    t["a1.n_list"] = {[](RunConfig& c, const std::string& v) {
                        c.a1_n.clear();
                        for (const auto& s : split_list(v)) c.a1_n.push_back(static_cast<int>(to_long("a1.n_list", s)));
                      },
                      [](const RunConfig& c) { return join(c.a1_n, [](int n) { return std::to_string(n); }); }};
    real("a1.amplitude", &RunConfig::a1_amplitude);

    integer("a2.seeds", &RunConfig::a2_seeds);
    text("a2.family", &RunConfig::a2_family, {"fixed", "oscillatory"});

    t["kernel.n_time"] = {[](RunConfig& c, const std::string& v) { c.kernel_sampling.n_time = static_cast<int>(to_long("kernel.n_time", v)); },
                          [](const RunConfig& c) { return std::to_string(c.kernel_sampling.n_time); }};
    t["kernel.n_space"] = {[](RunConfig& c, const std::string& v) { c.kernel_sampling.n_space = static_cast<int>(to_long("kernel.n_space", v)); },
                           [](const RunConfig& c) { return std::to_string(c.kernel_sampling.n_space); }};
    t["kernel.alpha"] = {[](RunConfig& c, const std::string& v) { c.kernel_sampling.alpha = to_double("kernel.alpha", v); },
                         [](const RunConfig& c) { return format_double(c.kernel_sampling.alpha); }};
    t["kernel.gamma"] = {[](RunConfig& c, const std::string& v) { c.kernel_sampling.gamma = to_double("kernel.gamma", v); },
                         [](const RunConfig& c) { return format_double(c.kernel_sampling.gamma); }};
    t["kernel.dim"] = {[](RunConfig& c, const std::string& v) { c.kernel_sampling.dim = to_double("kernel.dim", v); },
                       [](const RunConfig& c) { return format_double(c.kernel_sampling.dim); }};
    t["kernel.holder_modes"] = {[](RunConfig& c, const std::string& v) {
                                  c.kernel_sampling.holder_modes = static_cast<int>(to_long("kernel.holder_modes", v));
                                },
                                [](const RunConfig& c) { return std::to_string(c.kernel_sampling.holder_modes); }};
    integer("kernel.identity_nx", &RunConfig::kernel_nx);

    t["run.seed"] = {[](RunConfig& c, const std::string& v) { c.seed = to_u64("run.seed", v); },
                     [](const RunConfig& c) { return std::to_string(c.seed); }};
    integer("run.threads", &RunConfig::threads);
    t["run.out"] = {[](RunConfig& c, const std::string& v) { c.out = v; }, [](const RunConfig& c) { return c.out; }};
    return t;
  }();
  return table;
}

std::vector<double> sine_profile(const GridSpec& grid, int mode, double scale) {
  return sample_profile(grid, [mode, scale](double x) { return scale * std::sin(mode * std::numbers::pi * x); });
}

}  // namespace

KeyValues parse_key_values(const std::string& text) {
  KeyValues kv;
  std::istringstream in(text);
  std::string line;
  std::string section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ValidationError("config line " + std::to_string(lineno) + ": unterminated section");
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ValidationError("config line " + std::to_string(lineno) + ": expected key = value");
    std::string key = trim(line.substr(0, eq));
    if (key.empty()) throw ValidationError("config line " + std::to_string(lineno) + ": empty key");
    if (!section.empty()) key = section + "." + key;
    if (kv.count(key)) throw ValidationError("config line " + std::to_string(lineno) + ": duplicate key " + key);
    kv[key] = trim(line.substr(eq + 1));
  }
  return kv;
}

void RunConfig::apply(const KeyValues& kv) {
  const auto& table = fields();
  for (const auto& [key, value] : kv) {
    const auto it = table.find(key);
    if (it == table.end()) throw ValidationError("unknown config key: " + key);
    it->second.set(*this, value);
  }
}

void RunConfig::validate() const {
  grid.validate();
  solve.validate();
  if (initial_mode < 1) throw ValidationError("initial.mode must be >= 1");
  if (profile_mode < 1) throw ValidationError("event.mode must be >= 1");
  if (samples < 1) throw ValidationError("mc.samples must be >= 1");
  if (!(max_excluded_fraction >= 0.0 && max_excluded_fraction <= 1.0)) {
    throw ValidationError("mc.max_excluded_fraction must lie in [0, 1]");
  }
  if (!(target_tolerance > 0.0)) throw ValidationError("rate.tolerance must be positive");
  if (optimizer.max_iterations < 1) throw ValidationError("rate.max_iterations must be >= 1");
  if (epsilons.empty()) throw ValidationError("sweep.epsilons must not be empty");
  for (double e : epsilons) {
    if (!(e > 0.0)) throw ValidationError("sweep.epsilons must be positive");
  }
  for (std::size_t k = 1; k < a1_n.size(); ++k) {
    if (a1_n[k] <= a1_n[k - 1]) throw ValidationError("a1.n_list must increase");
  }
  if (a1_n.empty()) throw ValidationError("a1.n_list must not be empty");
  if (a2_seeds < 1) throw ValidationError("a2.seeds must be >= 1");
  if (kernel_nx < 2) throw ValidationError("kernel.identity_nx must be >= 2");
  if (threads < 0) throw ValidationError("run.threads must be >= 0");
  if (out.empty()) throw ValidationError("run.out must not be empty");
  if (!initial_values.empty() && static_cast<int>(initial_values.size()) != grid.nx) {
    throw ValidationError("initial.values has " + std::to_string(initial_values.size()) + " entries, grid.nx is " +
                          std::to_string(grid.nx));
  }
  coefficients();  // preset parameter checks
}

std::string RunConfig::canonical() const {
  std::string s;
  for (const auto& [key, f] : fields()) s += key + " = " + f.get(*this) + "\n";
  return s;
}

std::vector<double> RunConfig::eta() const {
  if (!initial_values.empty()) return initial_values;
  return sine_profile(grid, initial_mode, initial_amplitude);
}

Coefficients RunConfig::coefficients() const { return make_preset(preset, preset_params); }

Control RunConfig::control() const {
  const double a = control_amplitude;
  if (control_kind == "zero") return Control::zero(grid);
  if (control_kind == "constant") return Control::from_function(grid, [a](double, double) { return a; });
  const double T = grid.T;
  return Control::from_function(grid, [a, T](double t, double x) {
    return a * std::sin(std::numbers::pi * t / T) * std::sin(std::numbers::pi * x);
  });
}

std::vector<double> RunConfig::profile() const { return sine_profile(grid, profile_mode, std::numbers::sqrt2); }

EventSpec RunConfig::event() const {
  EventSpec e;
  e.level = event_level;
  if (event_kind == "terminal_projection") {
    e.kind = EventSpec::Kind::terminal_projection_geq;
    e.profile = profile();
  } else if (event_kind == "terminal_l2") {
    e.kind = EventSpec::Kind::terminal_l2_geq;
  } else {
    e.kind = EventSpec::Kind::sup_l2_geq;
  }
  return e;
}

TargetSpec RunConfig::target() const {
  TargetSpec t;
  t.kind = TargetSpec::Kind::terminal_projection;
  t.profile = profile();
  t.level = event_level;
  t.tolerance = target_tolerance;
  return t;
}

MCOptions RunConfig::mc_options() const {
  MCOptions o;
  o.threads = threads;
  o.max_excluded_fraction = max_excluded_fraction;
  o.truncation_level = solve.truncation_level;
  o.max_sup_l2 = solve.max_sup_l2;
  return o;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open config file " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  RunConfig cfg;
  cfg.apply(parse_key_values(ss.str()));
  return cfg;
}

}  // namespace spde
