#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "dms/dynamics.hpp"
#include "dms/normal_stream.hpp"
#include "dms/weighting.hpp"

namespace dms {

struct CheckReport {
  std::string check_name;
  bool pass = false;
  std::string worst_case;  // extremal instance, reproducible from seed + config
  double margin = 0.0;     // normalised (bound - observed); negative on failure
  std::uint64_t seed = 0;
  nlohmann::json config;

  nlohmann::json to_json() const;
};

/// Adaptive Dormand-Prince integration of the raw ODE
/// dP/dt = k01(V_t) - K(V_t) P, restarted at every discontinuity of a
/// piecewise-constant signal. Shares no code with the exact propagator.
Trajectory rk_oracle(const SwitchState& initial, const BiasSignal& signal,
                     const std::vector<double>& output_times, const RateFunction& rates,
                     double rk_tol = 1e-10);
Trajectory rk_oracle(const SwitchState& initial, const BiasSignal& signal, double t_end,
                     const RateFunction& rates, double rk_tol = 1e-10);

/// A random piecewise-constant test input.
struct RandomSignal {
  BiasSignal signal;
  std::vector<double> edges;  // segment start times followed by the end time
  double t_start() const { return edges.front(); }
  double t_end() const { return edges.back(); }
};

/// 1 to 50 segments, levels uniform in D, durations uniform in
/// [0.1, 10] / nu; the first segment starts at t0.
RandomSignal random_signal(UniformStream& u, const DomainBounds& D, double nu, double t0 = 0.0);
/// Same family, shifted so the last segment ends at t = 0.
RandomSignal random_past_signal(UniformStream& u, const DomainBounds& D, double nu);

/// Shared inputs of the checks. `rates` may be replaced by a fault-injecting
/// double; `oracle_rates` feeds the RK oracle and should be an independent
/// (uncached) evaluation.
struct CheckContext {
  SwitchParams params;
  QuadratureSpec quadrature;
  DomainBounds D{-2.0, 2.0};
  RateFunction rates;
  RateFunction oracle_rates;

  /// Tabulated rates over D and direct oracle rates for the given parameters.
  static CheckContext standard(const SwitchParams& p, const QuadratureSpec& q, const DomainBounds& D);
  nlohmann::json snapshot() const;
};

/// P^AB and P^ABbar (the latter propagated through its own equation with
/// k01 and k10 exchanged) stay >= -1e-12 on n random signals; initial states
/// cycle through 0, 1, 0.5 and a random draw.
CheckReport check_lemma1_positivity(const CheckContext& ctx, int n_signals, std::uint64_t seed);

/// Same trajectories: both probabilities within [-1e-12, 1 + 1e-12] and
/// summing to 1 within 1e-12.
CheckReport check_cor1_bounds(const CheckContext& ctx, int n_signals, std::uint64_t seed);

/// Phi_{t,t0} <= e^{-nu (t - t0)} (1 + 1e-9) on n random signals and constant
/// signals at the ends of D, with equality within 1e-6 at the K minimiser.
/// nu_override replaces the computed nu (fault injection).
CheckReport check_lemma2_decay(const CheckContext& ctx, int n_signals, std::uint64_t seed,
                               std::optional<double> nu_override = std::nullopt);

/// From P0 in {0, 1}, constant bias for horizon_multiplier / K(v): |P_end - P*| <= 1e-6
/// at every grid bias; the endpoint is confirmed by the RK oracle.
CheckReport check_cor2_steady_state(const CheckContext& ctx, const std::vector<double>& v_grid,
                                    double horizon_multiplier = 10.0, double rk_tol = 1e-10);

/// |F(V) - F(V')| <= M ||V - V'||_w + 2 tol on n random pairs of past inputs,
/// with M = (g1 + g2/nu) int e^{nu tau}/w. Default weighting: the
/// polynomial-exponential family with a = nu/2.
CheckReport check_thm1_lipschitz(const CheckContext& ctx, int n_pairs, std::uint64_t seed,
                                 std::optional<WeightingFunction> w = std::nullopt, double tol = 1e-10);

/// One-step map under test; defaults to dt_step.
using StepFunction = std::function<double(double P, double v, double Ts)>;

/// Two states under the same random sample sequence obey
/// |dP_k| <= |dP_0| e^{-nu Ts k} (1 + 1e-9) while the bound exceeds the
/// resolution floor 1e-14; c1, c2 finite for the polynomial-exponential
/// sequence with a = nu/2, divergent for exponential sequences with b = nu and 2 nu.
CheckReport check_thm2_convergence(const CheckContext& ctx, int n_histories, double Ts,
                                   std::uint64_t seed, StepFunction step = nullptr);

/// Sinusoids offset + amplitude cos(2 pi f t) from P = 0: over the first input
/// cycle starting at or after 5/nu (nu over the signal range) the response
/// differs from its shift by period_factor / f by at most 1e-4.
CheckReport check_periodicity(const CheckContext& ctx, const std::vector<double>& frequencies,
                              double offset = 1.0, double amplitude = 0.5,
                              double period_factor = 1.0);

struct SuiteConfig {
  int n_signals = 100;
  int n_pairs = 200;
  int n_histories = 100;
  double Ts = 0.5;
  int steady_grid = 51;
  double horizon_multiplier = 10.0;
  std::vector<double> frequencies{0.01, 0.05, 0.1, 0.2};
  std::uint64_t seed = 1;
  double tol = 1e-10;
  double rk_tol = 1e-10;

  nlohmann::json to_json() const;
};

SuiteConfig suite_config_from_json(const nlohmann::json& j);

/// Runs every check (concurrently up to `threads`); order of reports is fixed.
std::vector<CheckReport> run_suite(const CheckContext& ctx, const SuiteConfig& cfg, int threads = 1);
nlohmann::json suite_report_json(const std::vector<CheckReport>& reports);

}  // namespace dms
