#pragma once

#include <optional>
#include <vector>

#include <Eigen/Core>

#include "dms/csv.hpp"
#include "dms/rates.hpp"
#include "dms/signal.hpp"

namespace dms {

struct SwitchState {
  double t = 0.0;     // s
  double P_AB = 0.0;  // on-state probability
  double P_ABbar() const { return 1.0 - P_AB; }
};

struct Trajectory {
  Eigen::VectorXd times;
  Eigen::VectorXd P_AB;
  Eigen::VectorXd V;
  std::optional<Eigen::VectorXd> I_avg;  // A, filled by the caller when requested

  Eigen::Index size() const { return times.size(); }
  /// Columns t, P_AB, P_ABbar, V[, I_avg].
  CsvTable to_csv() const;
};

/// Phi_{t,tau} = exp(int_tau^t A(V_s) ds). Exact segment sum for piecewise
/// constant signals, adaptive Gauss-Kronrod otherwise.
double transition(double t, double tau, const BiasSignal& signal, const RateFunction& rates);
/// int_tau^t A(V_s) ds, i.e. log Phi_{t,tau}; stays finite where Phi underflows.
double transition_exponent(double t, double tau, const BiasSignal& signal, const RateFunction& rates);

/// Fixed point k01 / (k01 + k10) under constant bias.
double steady_state(double v, const RateFunction& rates);

/// Closed-form zero-order-hold gain -(k01/A)(1 - e^{A Ts}), evaluated without
/// cancellation as k01 Ts expm1(A Ts)/(A Ts).
double dt_gain(double v, double Ts, const RateFunction& rates);
double dt_gain(const RateSet& r, double Ts);

/// One exact ZOH step e^{A Ts} P + G. P must lie in [0, 1] up to 1e-12.
double dt_step(double P, double v, double Ts, const RateFunction& rates);

struct PropagateOptions {
  /// Sup-norm agreement demanded between successive step halvings (smooth signals).
  double tol = 1e-8;
  /// Initial substep for smooth signals; 0 picks period/8, else the output spacing.
  double initial_step = 0.0;
  int max_halvings = 16;
};

/// Exact solution sampled at the given ascending output times (all >= initial.t).
/// Piecewise-constant signals are advanced segment by segment in closed form.
/// Smooth signals use exponential Gauss-Legendre collocation substeps, halved
/// until two successive refinements agree to opts.tol; NonConvergence reports
/// the achieved difference otherwise.
Trajectory propagate(const SwitchState& initial, const BiasSignal& signal,
                     const std::vector<double>& output_times, const RateFunction& rates,
                     const PropagateOptions& opts = {});

/// Uniform output grid initial.t, initial.t + output_dt, ..., t_end (t_end always
/// included). output_dt <= 0 selects (t_end - initial.t) / 1000.
Trajectory propagate(const SwitchState& initial, const BiasSignal& signal, double t_end,
                     double output_dt, const RateFunction& rates, const PropagateOptions& opts = {});

/// How samples older than the supplied history are defined.
struct Padding {
  enum class Kind { none, hold_oldest, constant };
  Kind kind = Kind::none;
  double value = 0.0;  // for Kind::constant

  static Padding none() { return {}; }
  static Padding hold_oldest() { return {Kind::hold_oldest, 0.0}; }
  static Padding constant(double v) { return {Kind::constant, v}; }
};

/// Truncation depth ceil(ln(1/tol) / (nu Ts)).
long truncation_depth(double nu, double Ts, double tol);

/// Discrete fading-memory functional: the state at k = 0 driven by the history
/// (chronological, history.back() = V_{-1}). With at least truncation_depth()
/// samples the series is summed from P = 0 over the most recent depth samples.
/// Shorter histories need padding: a constant infinite past is summed in
/// closed form (it leaves the state at its steady value). Every sample must
/// satisfy K(v) >= nu, i.e. lie in the domain nu was computed on.
double dt_fading_functional(const std::vector<double>& history, double Ts, const RateFunction& rates,
                            double nu, double tol = 1e-10, Padding padding = Padding::none());

struct FilterOutput {
  std::vector<long> k;
  std::vector<double> t;
  std::vector<double> V;  // V_k, the sample applied on [k Ts, (k+1) Ts)
  std::vector<double> Y;  // Y_k, depends on V_j for j < k only
  CsvTable to_csv() const;
};

/// Y_k for k in [k_first, k_last] with V_j = samples[j - k0]. Samples before
/// k0 follow `padding`; without padding, k_first must be at least
/// k0 + truncation_depth.
FilterOutput dt_filter(const std::vector<double>& samples, long k0, long k_first, long k_last,
                       double Ts, const RateFunction& rates, double nu, double tol = 1e-10,
                       Padding padding = Padding::none());

/// Same, sampling V_j = signal(j Ts); the signal is defined for all t.
FilterOutput dt_filter(const BiasSignal& signal, long k_first, long k_last, double Ts,
                       const RateFunction& rates, double nu, double tol = 1e-10);

/// Horizon ln(1/tol) / nu beyond which the past contributes less than tol.
double truncation_horizon(double nu, double tol);

/// Continuous fading-memory functional at time t: propagate from P = 0 at
/// t - truncation_horizon(nu, tol) to t.
double ct_fading_functional(const BiasSignal& signal, double t, const RateFunction& rates, double nu,
                            double tol = 1e-10, const PropagateOptions& opts = {});

/// Y at each ascending time, from one propagation started a horizon before the first.
std::vector<double> ct_filter(const BiasSignal& signal, const std::vector<double>& times,
                              const RateFunction& rates, double nu, double tol = 1e-10,
                              const PropagateOptions& opts = {});

}  // namespace dms
