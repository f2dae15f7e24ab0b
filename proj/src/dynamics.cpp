#include "dms/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "dms/constants.hpp"
#include "dms/error.hpp"
#include "dms/quadrature.hpp"

namespace dms {

CsvTable Trajectory::to_csv() const {
  CsvTable t;
  auto col = [](const Eigen::VectorXd& x) { return std::vector<double>(x.data(), x.data() + x.size()); };
  t.header = {"t", "P_AB", "P_ABbar", "V"};
  t.columns = {col(times), col(P_AB), col((1.0 - P_AB.array()).matrix()), col(V)};
  if (I_avg) {
    t.header.push_back("I_avg");
    t.columns.push_back(col(*I_avg));
  }
  return t;
}

namespace {

void require_contracting(const RateSet& r) {
  if (!(r.K >= constants::contraction_guard)) {
    std::ostringstream msg;
    msg << "degenerate contraction: K(" << r.v << ") = " << r.K << " s^-1";
    throw DegenerateContraction(msg.str());
  }
}

// expm1(z)/z, the zero-order-hold gain per unit k01 and time.
double phi1(double z) { return z == 0.0 ? 1.0 : std::expm1(z) / z; }

// Exact update over an interval of length d at frozen rates. Valid for any
// sign of A, so fault-injecting rate doubles propagate without guards.
double exact_step(double P, const RateSet& r, double d) {
  return std::exp(r.A * d) * P + r.k01 * d * phi1(r.A * d);
}

}  // namespace

double transition(double t, double tau, const BiasSignal& signal, const RateFunction& rates) {
  return std::exp(transition_exponent(t, tau, signal, rates));
}

double transition_exponent(double t, double tau, const BiasSignal& signal, const RateFunction& rates) {
  if (!(t >= tau)) throw InvalidArgument("transition: requires t >= tau");
  if (t == tau) return 0.0;
  double exponent = 0.0;
  if (signal.is_piecewise_constant()) {
    double s = tau;
    while (s < t) {
      const double next = std::min(t, signal.next_change_after(s));
      exponent += rates(signal(s)).A * (next - s);
      s = next;
    }
  } else {
    // Rates from quadrature carry ~1e-12 noise; a tighter target than 1e-10
    // relative would only chase it.
    const auto r = integrate_interval([&](double s) { return rates(signal(s)).A; }, tau, t, 1e-12,
                                      1e-10, 4000);
    exponent = r.value;
  }
  return exponent;
}

double steady_state(double v, const RateFunction& rates) {
  const RateSet r = rates(v);
  require_contracting(r);
  return r.k01 / r.K;
}

double dt_gain(const RateSet& r, double Ts) {
  if (!(Ts > 0) || !std::isfinite(Ts)) throw InvalidArgument("dt_gain: Ts must be > 0");
  require_contracting(r);
  return r.k01 * Ts * phi1(r.A * Ts);
}

double dt_gain(double v, double Ts, const RateFunction& rates) { return dt_gain(rates(v), Ts); }

double dt_step(double P, double v, double Ts, const RateFunction& rates) {
  if (!(P >= -1e-12 && P <= 1.0 + 1e-12)) throw InvalidArgument("dt_step: P must lie in [0, 1]");
  const RateSet r = rates(v);
  return std::exp(r.A * Ts) * P + dt_gain(r, Ts);
}

namespace {

void check_outputs(const SwitchState& initial, const std::vector<double>& out) {
  if (!(initial.P_AB >= 0.0 && initial.P_AB <= 1.0)) {
    throw InvalidArgument("propagate: initial P_AB must lie in [0, 1]");
  }
  if (!std::isfinite(initial.t)) throw InvalidArgument("propagate: initial time must be finite");
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (!std::isfinite(out[i]) || out[i] < initial.t || (i > 0 && !(out[i] > out[i - 1]))) {
      throw InvalidArgument("propagate: output times must be finite, strictly ascending and >= t0");
    }
  }
}

Trajectory make_trajectory(const BiasSignal& signal, const std::vector<double>& out,
                           const std::vector<double>& P) {
  Trajectory tr;
  const auto n = static_cast<Eigen::Index>(out.size());
  tr.times = Eigen::Map<const Eigen::VectorXd>(out.data(), n);
  tr.P_AB = Eigen::Map<const Eigen::VectorXd>(P.data(), n);
  tr.V.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) tr.V(i) = signal(out[static_cast<std::size_t>(i)]);
  return tr;
}

std::vector<double> propagate_piecewise(const SwitchState& initial, const BiasSignal& signal,
                                        const std::vector<double>& out, const RateFunction& rates) {
  std::map<double, RateSet> cache;
  auto rate = [&](double v) -> const RateSet& {
    auto it = cache.find(v);
    if (it == cache.end()) it = cache.emplace(v, rates(v)).first;
    return it->second;
  };
  std::vector<double> P(out.size());
  double p = initial.P_AB;
  double t = initial.t;
  for (std::size_t j = 0; j < out.size(); ++j) {
    while (t < out[j]) {
      const double next = std::min(out[j], signal.next_change_after(t));
      p = exact_step(p, rate(signal(t)), next - t);
      t = next;
    }
    P[j] = p;
  }
  return P;
}

// Gauss-Legendre collocation data on [-1, 1]: nodes x, weights w and
// C(i, j) = int_{x_i}^{1} l_j(x) dx for the Lagrange basis l_j on the nodes.
struct Collocation {
  static constexpr int m = 8;
  Eigen::VectorXd x, w;
  Eigen::MatrixXd C;

  Collocation() {
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(m, m);
    for (int k = 1; k < m; ++k) J(k, k - 1) = J(k - 1, k) = k / std::sqrt(4.0 * k * k - 1.0);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
    x = es.eigenvalues();
    w = 2.0 * es.eigenvectors().row(0).array().square().transpose();
    auto lagrange = [&](int j, double y) {
      double l = 1.0;
      for (int q = 0; q < m; ++q) {
        if (q != j) l *= (y - x(q)) / (x(j) - x(q));
      }
      return l;
    };
    C.resize(m, m);
    for (int i = 0; i < m; ++i) {
      const double half = 0.5 * (1.0 - x(i));
      for (int j = 0; j < m; ++j) {
        double s = 0.0;
        for (int q = 0; q < m; ++q) s += w(q) * lagrange(j, x(i) + half * (x(q) + 1.0));
        C(i, j) = half * s;
      }
    }
  }
};

const Collocation& collocation() {
  static const Collocation c;
  return c;
}

std::vector<double> propagate_smooth_once(const SwitchState& initial, const BiasSignal& signal,
                                          const std::vector<double>& out, const RateFunction& rates,
                                          double h) {
  const Collocation& c = collocation();
  Eigen::VectorXd a(Collocation::m), k(Collocation::m);
  std::vector<double> P(out.size());
  double p = initial.P_AB;
  double t = initial.t;
  for (std::size_t j = 0; j < out.size(); ++j) {
    const double span = out[j] - t;
    const long steps = span > 0 ? std::max(1L, static_cast<long>(std::ceil(span / h))) : 0;
    for (long s = 0; s < steps; ++s) {
      const double t0 = t + span * static_cast<double>(s) / static_cast<double>(steps);
      const double t1 = s + 1 == steps ? out[j] : t + span * static_cast<double>(s + 1) / static_cast<double>(steps);
      const double half = 0.5 * (t1 - t0);
      for (int i = 0; i < Collocation::m; ++i) {
        const RateSet r = rates(signal(t0 + half * (c.x(i) + 1.0)));
        a(i) = r.A;
        k(i) = r.k01;
      }
      const Eigen::VectorXd tail = half * (c.C * a);
      p = std::exp(half * c.w.dot(a)) * p + half * (c.w.array() * tail.array().exp() * k.array()).sum();
    }
    t = out[j];
    P[j] = p;
  }
  return P;
}

}  // namespace

Trajectory propagate(const SwitchState& initial, const BiasSignal& signal,
                     const std::vector<double>& output_times, const RateFunction& rates,
                     const PropagateOptions& opts) {
  check_outputs(initial, output_times);
  if (signal.is_piecewise_constant()) {
    return make_trajectory(signal, output_times, propagate_piecewise(initial, signal, output_times, rates));
  }
  if (!(opts.tol > 0)) throw InvalidArgument("propagate: tol must be > 0");
  if (output_times.empty()) return make_trajectory(signal, output_times, {});

  double h = opts.initial_step;
  if (!(h > 0)) {
    if (auto T = signal.period()) h = *T / 8.0;
    else {
      double spacing = output_times.front() - initial.t;
      for (std::size_t j = 1; j < output_times.size(); ++j) {
        spacing = std::max(spacing, output_times[j] - output_times[j - 1]);
      }
      h = spacing;
    }
  }
  std::vector<double> coarse = propagate_smooth_once(initial, signal, output_times, rates, h);
  double diff = 0.0;
  for (int level = 0; level < opts.max_halvings; ++level) {
    h *= 0.5;
    std::vector<double> fine = propagate_smooth_once(initial, signal, output_times, rates, h);
    diff = 0.0;
    for (std::size_t j = 0; j < fine.size(); ++j) diff = std::max(diff, std::abs(fine[j] - coarse[j]));
    coarse = std::move(fine);
    if (diff < opts.tol) return make_trajectory(signal, output_times, coarse);
  }
  std::ostringstream msg;
  msg << "propagate: step halving stalled at sup difference " << diff << " (tol " << opts.tol << ")";
  throw NonConvergence(msg.str(), coarse.back(), diff);
}

Trajectory propagate(const SwitchState& initial, const BiasSignal& signal, double t_end,
                     double output_dt, const RateFunction& rates, const PropagateOptions& opts) {
  if (!(t_end > initial.t) || !std::isfinite(t_end)) {
    throw InvalidArgument("propagate: t_end must exceed the initial time");
  }
  const double span = t_end - initial.t;
  const double dt = output_dt > 0 ? output_dt : span / 1000.0;
  const auto n = static_cast<long>(std::floor(span / dt * (1.0 + 1e-12)));
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(n) + 2);
  for (long j = 0; j <= n; ++j) {
    const double t = initial.t + static_cast<double>(j) * dt;
    if (t < t_end) out.push_back(t);
  }
  out.push_back(t_end);
  return propagate(initial, signal, out, rates, opts);
}

long truncation_depth(double nu, double Ts, double tol) {
  if (!(nu > 0) || !(Ts > 0) || !(tol > 0 && tol < 1)) {
    throw InvalidArgument("truncation_depth: requires nu > 0, Ts > 0 and 0 < tol < 1");
  }
  return static_cast<long>(std::ceil(std::log(1.0 / tol) / (nu * Ts)));
}

double truncation_horizon(double nu, double tol) {
  if (!(nu > 0) || !(tol > 0 && tol < 1)) {
    throw InvalidArgument("truncation_horizon: requires nu > 0 and 0 < tol < 1");
  }
  return std::log(1.0 / tol) / nu;
}

namespace {

RateSet checked_rate(double v, const RateFunction& rates, double nu) {
  const RateSet r = rates(v);
  if (!(r.K >= nu * (1.0 - 1e-9))) {
    std::ostringstream msg;
    msg << "fading functional: K(" << v << ") = " << r.K << " is below nu = " << nu
        << "; the sample lies outside the domain nu was computed on";
    throw InvalidArgument(msg.str());
  }
  return r;
}

// Iterates the ZOH map over rates[first, last) from state P.
double iterate(double P, const std::vector<RateSet>& r, std::size_t first, std::size_t last, double Ts) {
  for (std::size_t i = first; i < last; ++i) P = std::exp(r[i].A * Ts) * P + dt_gain(r[i], Ts);
  return P;
}

std::optional<double> padding_value(const Padding& padding, const std::vector<double>& samples) {
  switch (padding.kind) {
    case Padding::Kind::none:
      return std::nullopt;
    case Padding::Kind::constant:
      return padding.value;
    case Padding::Kind::hold_oldest:
      if (samples.empty()) throw InvalidArgument("fading functional: hold_oldest padding needs a sample");
      return samples.front();
  }
  return std::nullopt;
}

// Y for the history r[0, end) under the resolved padding.
double functional_on(const std::vector<RateSet>& r, std::size_t end, double Ts, long depth,
                     const std::optional<RateSet>& pad) {
  const auto L = static_cast<std::size_t>(depth);
  if (end >= L) return iterate(0.0, r, end - L, end, Ts);
  if (!pad) {
    std::ostringstream msg;
    msg << "fading functional: history has " << end << " samples but truncation depth " << depth
        << " is required; choose a padding rule";
    throw InvalidArgument(msg.str());
  }
  return iterate(pad->k01 / pad->K, r, 0, end, Ts);
}

}  // namespace

double dt_fading_functional(const std::vector<double>& history, double Ts, const RateFunction& rates,
                            double nu, double tol, Padding padding) {
  const long depth = truncation_depth(nu, Ts, tol);
  std::vector<RateSet> r;
  r.reserve(history.size());
  for (double v : history) r.push_back(checked_rate(v, rates, nu));
  std::optional<RateSet> pad;
  if (auto value = padding_value(padding, history)) pad = checked_rate(*value, rates, nu);
  return functional_on(r, r.size(), Ts, depth, pad);
}

CsvTable FilterOutput::to_csv() const {
  CsvTable t;
  t.header = {"k", "t", "V_k", "Y_k"};
  std::vector<double> kd(k.begin(), k.end());
  t.columns = {kd, this->t, V, Y};
  return t;
}

FilterOutput dt_filter(const std::vector<double>& samples, long k0, long k_first, long k_last,
                       double Ts, const RateFunction& rates, double nu, double tol, Padding padding) {
  if (k_first > k_last) throw InvalidArgument("dt_filter: empty k range");
  const long n = static_cast<long>(samples.size());
  if (k_last >= k0 + n) throw InvalidArgument("dt_filter: k_last is beyond the supplied samples");
  const long depth = truncation_depth(nu, Ts, tol);
  std::vector<RateSet> r;
  r.reserve(samples.size());
  for (double v : samples) r.push_back(checked_rate(v, rates, nu));
  const std::optional<double> pad_value = padding_value(padding, samples);
  std::optional<RateSet> pad;
  if (pad_value) pad = checked_rate(*pad_value, rates, nu);

  FilterOutput out;
  for (long k = k_first; k <= k_last; ++k) {
    out.k.push_back(k);
    out.t.push_back(static_cast<double>(k) * Ts);
    if (k < k0) {
      if (!pad) throw InvalidArgument("dt_filter: k precedes the samples and no padding is set");
      out.V.push_back(*pad_value);
      out.Y.push_back(pad->k01 / pad->K);
      continue;
    }
    out.V.push_back(samples[static_cast<std::size_t>(k - k0)]);
    out.Y.push_back(functional_on(r, static_cast<std::size_t>(k - k0), Ts, depth, pad));
  }
  return out;
}

FilterOutput dt_filter(const BiasSignal& signal, long k_first, long k_last, double Ts,
                       const RateFunction& rates, double nu, double tol) {
  if (!(Ts > 0)) throw InvalidArgument("dt_filter: Ts must be > 0");
  if (k_first > k_last) throw InvalidArgument("dt_filter: empty k range");
  const long depth = truncation_depth(nu, Ts, tol);
  const long k0 = k_first - depth;
  std::vector<double> samples;
  for (long j = k0; j <= k_last; ++j) samples.push_back(signal(static_cast<double>(j) * Ts));
  return dt_filter(samples, k0, k_first, k_last, Ts, rates, nu, tol, Padding::none());
}

double ct_fading_functional(const BiasSignal& signal, double t, const RateFunction& rates, double nu,
                            double tol, const PropagateOptions& opts) {
  return ct_filter(signal, {t}, rates, nu, tol, opts).front();
}

std::vector<double> ct_filter(const BiasSignal& signal, const std::vector<double>& times,
                              const RateFunction& rates, double nu, double tol,
                              const PropagateOptions& opts) {
  if (times.empty()) return {};
  const double start = times.front() - truncation_horizon(nu, tol);
  const Trajectory tr = propagate({start, 0.0}, signal, times, rates, opts);
  return {tr.P_AB.data(), tr.P_AB.data() + tr.P_AB.size()};
}

}  // namespace dms
