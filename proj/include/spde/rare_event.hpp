#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "spde/grid.hpp"
#include "spde/models.hpp"
#include "spde/rate.hpp"
#include "spde/solver.hpp"

namespace spde {

/// Threshold event on a trajectory.
struct EventSpec {
  enum class Kind { terminal_projection_geq, terminal_l2_geq, sup_l2_geq };
  Kind kind = Kind::terminal_projection_geq;
  std::vector<double> profile;  // used by terminal_projection_geq
  double level = 0.0;

  void validate(const GridSpec& grid) const;
  bool occurred(const Trajectory& u) const;
};

enum class Method { plain, tilted };
std::string method_name(Method m);

struct MCEstimate {
  double p_hat = 0.0;
  double std_error = 0.0;
  long n = 0;         // samples requested
  long excluded = 0;  // samples dropped after solver blow-up
  long hits = 0;
  double epsilon = 0.0;
  Method method = Method::plain;
  std::uint64_t master_seed = 0;
};

/// Raised when more than the allowed fraction of samples blew up.
class ExcessiveBlowUp : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct MCOptions {
  int threads = 0;  // 0: OpenMP default
  double max_excluded_fraction = 1e-3;
  std::optional<double> truncation_level;
  double max_sup_l2 = 1e6;
};

/// log of exp{ -(1/sqrt(eps)) sum v dW - |v|^2 / (2 eps) }.
double log_likelihood_weight(const Control& v, const SheetIncrements& sheet, double epsilon);
/// Density of the unshifted sheet law relative to the shifted one, on the grid.
double likelihood_weight(const Control& v, const SheetIncrements& sheet, double epsilon);

/// Monte Carlo estimate of P(event) for the equation with noise level
/// epsilon. With `tilt` the controlled equation is simulated and every
/// indicator is reweighted by likelihood_weight, so both modes estimate the
/// same probability. Sample k is driven by the sheet with seed
/// derive_seed(master_seed, k); samples run in parallel and are summed with a
/// fixed pairwise tree, so the result does not depend on the thread count.
MCEstimate estimate_probability(const EventSpec& event, std::span<const double> eta, const Coefficients& c,
                                const GridSpec& grid, double epsilon, long n, std::uint64_t master_seed,
                                const Control* tilt, const MCOptions& options = {});

namespace reference {
/// Single-threaded estimate_probability; bit-identical to the parallel one.
MCEstimate estimate_probability(const EventSpec& event, std::span<const double> eta, const Coefficients& c,
                                const GridSpec& grid, double epsilon, long n, std::uint64_t master_seed,
                                const Control* tilt, const MCOptions& options = {});
}  // namespace reference

enum class TiltPolicy { plain, tilted, automatic };

struct LDPRow {
  double epsilon = 0.0;
  MCEstimate estimate;
  double minus_eps_log_p = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  std::optional<double> oracle_minus_eps_log_p;
};

struct LDPReport {
  std::vector<LDPRow> rows;
  double reference_rate = 0.0;       // minimized action for the event's target
  std::optional<double> oracle_rate;  // analytic limit when available
  RateResult minimizer;
};

struct LDPOptions {
  TiltPolicy policy = TiltPolicy::automatic;
  double tilt_below_epsilon = 0.2;  // automatic policy switches to tilting below this
  OptimizerSettings optimizer{};
  double target_tolerance = 1e-6;
  MCOptions mc{};
};

/// Gaussian law of <u(T), profile> for the continuum linear heat equation
/// (f = g = 0, sigma = 1), with eta and profile expanded in the grid's sine
/// basis; nullopt for other presets. Returns {mean, std per sqrt(eps)}.
std::optional<std::pair<double, double>> linear_projection_law(const Coefficients& c, const GridSpec& grid,
                                                               std::span<const double> eta,
                                                               std::span<const double> profile);

/// Upper Gaussian tail P(Z >= z).
double gaussian_tail(double z);

/// One estimate per epsilon (decreasing), each row with its own derived seed,
/// against the minimized action of the matching terminal target.
LDPReport ldp_curve(const EventSpec& event, std::span<const double> eta, const Coefficients& c,
                    const GridSpec& grid, std::span<const double> epsilons, long n, std::uint64_t master_seed,
                    const LDPOptions& options = {});

struct A2Row {
  double epsilon = 0.0;
  double mean_distance = 0.0;
  double std_distance = 0.0;
  int samples = 0;
  int excluded = 0;
};

using EtaFamily = std::function<std::vector<double>(double epsilon)>;
using ControlFamily = std::function<Control(double epsilon)>;

/// For each epsilon: mean over seeds of c0l2_distance between the noisy
/// controlled solution started at eta_family(eps) with control v_family(eps)
/// and the skeleton from (eta, v_limit).
std::vector<A2Row> a2_experiment(const EtaFamily& eta_family, const ControlFamily& v_family,
                                 const Control& v_limit, std::span<const double> eta, const Coefficients& c,
                                 const GridSpec& grid, std::span<const double> epsilons,
                                 std::span<const std::uint64_t> seeds, const MCOptions& options = {});

struct A1Row {
  int n = 0;
  double distance = 0.0;
  double control_norm_sq = 0.0;
};

/// Skeleton distances under oscillatory_family(v, n, amplitude).
std::vector<A1Row> a1_experiment(std::span<const double> eta, const Coefficients& c, const GridSpec& grid,
                                 const Control& v, std::span<const int> n_list, double amplitude);

/// Least-squares slope of log y against log x.
double loglog_slope(std::span<const double> x, std::span<const double> y);

}  // namespace spde
