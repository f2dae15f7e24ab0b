#include "dms/verify.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <sstream>

#include <boost/numeric/odeint.hpp>

#include "dms/error.hpp"
#include "dms/parallel.hpp"

namespace dms {

nlohmann::json CheckReport::to_json() const {
  return {{"check_name", check_name}, {"verdict", pass ? "pass" : "fail"}, {"worst_case", worst_case},
          {"margin", margin},         {"seed", seed},                      {"config", config}};
}

// ---------------------------------------------------------------------------
// RK oracle

namespace {

using OdeState = std::array<double, 1>;

double integrate_rk(double P, double a, double b, const std::function<RateSet(double)>& at, double tol) {
  namespace ode = boost::numeric::odeint;
  if (b <= a) return P;
  OdeState x{P};
  auto rhs = [&](const OdeState& y, OdeState& dy, double t) {
    const RateSet r = at(t);
    dy[0] = r.k01 - r.K * y[0];
  };
  auto stepper = ode::make_controlled(tol, tol, ode::runge_kutta_dopri5<OdeState>());
  ode::integrate_adaptive(stepper, rhs, x, a, b, std::min(b - a, 1e-3));
  return x[0];
}

}  // namespace

Trajectory rk_oracle(const SwitchState& initial, const BiasSignal& signal,
                     const std::vector<double>& output_times, const RateFunction& rates, double rk_tol) {
  if (!(rk_tol > 0)) throw InvalidArgument("rk_oracle: tolerance must be > 0");
  for (std::size_t i = 0; i < output_times.size(); ++i) {
    if (output_times[i] < initial.t || (i > 0 && !(output_times[i] > output_times[i - 1]))) {
      throw InvalidArgument("rk_oracle: output times must be ascending and >= t0");
    }
  }
  const bool piecewise = signal.is_piecewise_constant();
  Trajectory tr;
  const auto n = static_cast<Eigen::Index>(output_times.size());
  tr.times.resize(n);
  tr.P_AB.resize(n);
  tr.V.resize(n);
  double P = initial.P_AB;
  double t = initial.t;
  for (Eigen::Index j = 0; j < n; ++j) {
    const double target = output_times[static_cast<std::size_t>(j)];
    while (t < target) {
      if (piecewise) {
        // Freeze the level so the right-hand side is smooth on the piece.
        const double next = std::min(target, signal.next_change_after(t));
        const RateSet r = rates(signal(t));
        P = integrate_rk(P, t, next, [&](double) { return r; }, rk_tol);
        t = next;
      } else {
        P = integrate_rk(P, t, target, [&](double s) { return rates(signal(s)); }, rk_tol);
        t = target;
      }
    }
    tr.times(j) = target;
    tr.P_AB(j) = P;
    tr.V(j) = signal(target);
  }
  return tr;
}

Trajectory rk_oracle(const SwitchState& initial, const BiasSignal& signal, double t_end,
                     const RateFunction& rates, double rk_tol) {
  if (!(t_end >= initial.t)) throw InvalidArgument("rk_oracle: t_end must be >= t0");
  std::vector<double> out{initial.t};
  if (t_end > initial.t) out.push_back(t_end);
  return rk_oracle(initial, signal, out, rates, rk_tol);
}

// ---------------------------------------------------------------------------
// Random inputs

namespace {

double uniform_in(UniformStream& u, double lo, double hi) { return lo + (hi - lo) * u.next(); }

std::string describe(double x) {
  std::ostringstream s;
  s.precision(17);
  s << x;
  return s.str();
}

}  // namespace

RandomSignal random_signal(UniformStream& u, const DomainBounds& D, double nu, double t0) {
  if (!(nu > 0)) throw InvalidArgument("random_signal: nu must be > 0");
  const int segments = 1 + static_cast<int>(u.next() * 50.0);
  std::vector<double> times, values;
  RandomSignal out{BiasSignal::constant(0.0), {}};
  double t = t0;
  for (int i = 0; i < segments; ++i) {
    times.push_back(t);
    values.push_back(uniform_in(u, D.a, D.b));
    out.edges.push_back(t);
    t += uniform_in(u, 0.1, 10.0) / nu;
  }
  out.edges.push_back(t);
  out.signal = BiasSignal::piecewise(std::move(times), std::move(values)).with_domain(D);
  return out;
}

RandomSignal random_past_signal(UniformStream& u, const DomainBounds& D, double nu) {
  RandomSignal s = random_signal(u, D, nu, 0.0);
  const double shift = -s.t_end();
  std::vector<double> times, values;
  for (std::size_t i = 0; i + 1 < s.edges.size(); ++i) {
    values.push_back(s.signal(s.edges[i]));
    times.push_back(s.edges[i] + shift);
  }
  for (double& e : s.edges) e += shift;
  s.edges.back() = 0.0;
  s.signal = BiasSignal::piecewise(std::move(times), std::move(values)).with_domain(D);
  return s;
}

// ---------------------------------------------------------------------------
// Context

CheckContext CheckContext::standard(const SwitchParams& p, const QuadratureSpec& q, const DomainBounds& D) {
  CheckContext ctx;
  ctx.params = p;
  ctx.quadrature = q;
  ctx.D = D;
  ctx.rates = tabulated_rates(p, q, D);
  ctx.oracle_rates = direct_rates(p, q);
  return ctx;
}

nlohmann::json CheckContext::snapshot() const {
  return {{"params", params_to_json(params)},
          {"quadrature", quadrature_to_json(quadrature)},
          {"domain", {D.a, D.b}}};
}

namespace {

// Tags separating the random streams of the checks.
enum : std::uint64_t {
  kTagLemma1 = 101,
  kTagCor1 = 102,
  kTagLemma2 = 103,
  kTagThm1 = 105,
  kTagThm2 = 106,
};

RateFunction complement(const RateFunction& rates) {
  return [rates](double v) {
    RateSet r = rates(v);
    std::swap(r.k01, r.k10);
    return r;
  };
}

struct PairTrajectory {
  std::vector<double> t, P_AB, P_ABbar;
  double P0;
};

PairTrajectory simulate_both(const CheckContext& ctx, const RandomSignal& s, double P0) {
  // Extremes of a monotone relaxation lie at the segment edges; interior
  // samples are added for coverage.
  std::vector<double> t;
  for (std::size_t i = 0; i + 1 < s.edges.size(); ++i) {
    for (int k = 0; k < 8; ++k) t.push_back(s.edges[i] + (s.edges[i + 1] - s.edges[i]) * k / 8.0);
  }
  t.push_back(s.t_end());
  const Trajectory a = propagate({s.t_start(), P0}, s.signal, t, ctx.rates);
  const Trajectory b = propagate({s.t_start(), 1.0 - P0}, s.signal, t, complement(ctx.rates));
  PairTrajectory out{t, {a.P_AB.data(), a.P_AB.data() + a.size()},
                     {b.P_AB.data(), b.P_AB.data() + b.size()}, P0};
  return out;
}

double initial_state(int i, UniformStream& u) {
  switch (i % 4) {
    case 0: return 0.0;
    case 1: return 1.0;
    case 2: return 0.5;
    default: return u.next();
  }
}

// Shared driver of the Lemma 1 / Corollary 1 checks. `score` returns the
// normalised margin of one sample (negative = violation).
template <class Score>
CheckReport positivity_family(const CheckContext& ctx, int n_signals, std::uint64_t seed, std::uint64_t tag,
                              const char* name, Score&& score) {
  CheckReport rep;
  rep.check_name = name;
  rep.seed = seed;
  rep.config = ctx.snapshot();
  rep.config["n_signals"] = n_signals;
  rep.config["slack"] = 1e-12;
  const double nu = contraction_rate_nu(ctx.D, ctx.rates).nu;
  UniformStream u(seed, tag);
  rep.margin = std::numeric_limits<double>::infinity();
  for (int i = 0; i < n_signals; ++i) {
    const RandomSignal s = random_signal(u, ctx.D, nu);
    const double P0 = initial_state(i, u);
    const PairTrajectory tr = simulate_both(ctx, s, P0);
    for (std::size_t j = 0; j < tr.t.size(); ++j) {
      const double m = score(tr.P_AB[j], tr.P_ABbar[j]);
      if (m < rep.margin) {
        rep.margin = m;
        rep.worst_case = "signal " + std::to_string(i) + " (" + std::to_string(s.edges.size() - 1) +
                         " segments), P0 = " + describe(P0) + ", t = " + describe(tr.t[j]) +
                         ": P_AB = " + describe(tr.P_AB[j]) + ", P_ABbar = " + describe(tr.P_ABbar[j]);
      }
    }
  }
  rep.pass = rep.margin >= 0.0;
  return rep;
}

}  // namespace

CheckReport check_lemma1_positivity(const CheckContext& ctx, int n_signals, std::uint64_t seed) {
  return positivity_family(ctx, n_signals, seed, kTagLemma1, "lemma1_positivity",
                           [](double a, double b) { return std::min(a, b) + 1e-12; });
}

CheckReport check_cor1_bounds(const CheckContext& ctx, int n_signals, std::uint64_t seed) {
  return positivity_family(ctx, n_signals, seed, kTagCor1, "cor1_bounds", [](double a, double b) {
    const double lower = std::min(a, b) + 1e-12;
    const double upper = 1.0 + 1e-12 - std::max(a, b);
    const double sum = 1e-12 - std::abs(a + b - 1.0);
    return std::min({lower, upper, sum});
  });
}

CheckReport check_lemma2_decay(const CheckContext& ctx, int n_signals, std::uint64_t seed,
                               std::optional<double> nu_override) {
  CheckReport rep;
  rep.check_name = "lemma2_decay";
  rep.seed = seed;
  rep.config = ctx.snapshot();
  const ContractionRate cr = contraction_rate_nu(ctx.D, ctx.rates);
  const double nu = nu_override.value_or(cr.nu);
  rep.config["n_signals"] = n_signals;
  rep.config["nu"] = nu;
  rep.config["nu_argmin"] = cr.argmin;
  if (nu_override) rep.config["nu_override"] = *nu_override;

  const double slack = std::log1p(1e-9);
  rep.margin = std::numeric_limits<double>::infinity();
  auto consider = [&](double excess, const std::string& what) {
    // Normalised margin 1 - Phi e^{nu dt} / (1 + 1e-9), computed via logs.
    const double m = -std::expm1(excess - slack);
    if (m < rep.margin) {
      rep.margin = m;
      rep.worst_case = what + ": Phi e^{nu (t - t0)} = " + describe(std::exp(excess));
    }
  };

  // Constant inputs at both ends of D and at the minimiser of K.
  double equality_error = 0.0;
  for (double v : {ctx.D.a, ctx.D.b, cr.argmin}) {
    const BiasSignal c = BiasSignal::constant(v);
    for (double dt : {0.5 / nu, 1.0 / nu, 10.0 / nu}) {
      const double excess = transition_exponent(dt, 0.0, c, ctx.rates) + nu * dt;
      consider(excess, "constant v = " + describe(v) + ", t - t0 = " + describe(dt));
      if (v == cr.argmin) equality_error = std::max(equality_error, std::abs(std::expm1(excess)));
    }
  }
  rep.config["equality_error_at_argmin"] = equality_error;

  UniformStream u(seed, kTagLemma2);
  for (int i = 0; i < n_signals; ++i) {
    const RandomSignal s = random_signal(u, ctx.D, cr.nu);
    std::vector<std::pair<double, double>> pairs;
    for (std::size_t e = 1; e < s.edges.size(); ++e) pairs.emplace_back(s.t_start(), s.edges[e]);
    for (int k = 0; k < 10; ++k) {
      double a = uniform_in(u, s.t_start(), s.t_end());
      double b = uniform_in(u, s.t_start(), s.t_end());
      if (a > b) std::swap(a, b);
      pairs.emplace_back(a, b);
    }
    for (const auto& [t0, t] : pairs) {
      const double excess = transition_exponent(t, t0, s.signal, ctx.rates) + nu * (t - t0);
      consider(excess, "signal " + std::to_string(i) + ", t0 = " + describe(t0) + ", t = " + describe(t));
    }
  }
  rep.pass = rep.margin >= 0.0 && equality_error <= 1e-6;
  if (rep.margin >= 0.0 && !rep.pass) {
    rep.worst_case = "bound not tight at the K minimiser: relative gap " + describe(equality_error);
  }
  return rep;
}

CheckReport check_cor2_steady_state(const CheckContext& ctx, const std::vector<double>& v_grid,
                                    double horizon_multiplier, double rk_tol) {
  CheckReport rep;
  rep.check_name = "cor2_steady_state";
  rep.config = ctx.snapshot();
  rep.config["grid_points"] = v_grid.size();
  rep.config["horizon_multiplier"] = horizon_multiplier;
  rep.config["rk_tol"] = rk_tol;
  rep.config["threshold"] = 1e-6;
  double worst = 0.0, worst_rk = 0.0, worst_agreement = 0.0;
  for (double v : v_grid) {
    const RateSet r = ctx.rates(v);
    const double P_star = steady_state(v, ctx.rates);
    const double T = horizon_multiplier / r.K;
    const BiasSignal c = BiasSignal::constant(v);
    for (double P0 : {0.0, 1.0}) {
      const double P_end = propagate({0.0, P0}, c, std::vector<double>{T}, ctx.rates).P_AB(0);
      const double P_rk = rk_oracle({0.0, P0}, c, T, ctx.oracle_rates, rk_tol).P_AB(1);
      const double err = std::abs(P_end - P_star);
      worst_rk = std::max(worst_rk, std::abs(P_rk - P_star));
      worst_agreement = std::max(worst_agreement, std::abs(P_rk - P_end));
      if (err >= worst) {
        worst = err;
        rep.worst_case = "v = " + describe(v) + ", P0 = " + describe(P0) + ": |P_end - P*| = " +
                         describe(err) + " (P* = " + describe(P_star) + ", e^{-" +
                         describe(horizon_multiplier) + "} |P0 - P*| = " +
                         describe(std::exp(-horizon_multiplier) * std::abs(P0 - P_star)) + ")";
      }
    }
  }
  rep.config["worst_exact_error"] = worst;
  rep.config["worst_rk_error"] = worst_rk;
  rep.config["rk_vs_exact"] = worst_agreement;
  rep.margin = (1e-6 - std::max(worst, worst_rk)) / 1e-6;
  rep.pass = rep.margin >= 0.0;
  return rep;
}

namespace {

// sup_{tau <= 0} w(tau) |V(tau) - V'(tau)| for inputs constant before their first edge.
double weighted_distance(const RandomSignal& x, const RandomSignal& y, const WeightingFunction& w) {
  std::vector<double> cuts;
  for (std::size_t i = 0; i + 1 < x.edges.size(); ++i) cuts.push_back(x.edges[i]);
  for (std::size_t i = 0; i + 1 < y.edges.size(); ++i) cuts.push_back(y.edges[i]);
  cuts.push_back(0.0);
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  const double first = cuts.front();
  double best = w.sup_on(-std::numeric_limits<double>::infinity(), first) *
                std::abs(x.signal(first - 1.0) - y.signal(first - 1.0));
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const double d = std::abs(x.signal(cuts[i]) - y.signal(cuts[i]));
    if (d > 0) best = std::max(best, d * w.sup_on(cuts[i], cuts[i + 1]));
  }
  return best;
}

RandomSignal perturbed(const RandomSignal& s, UniformStream& u, const DomainBounds& D, bool single) {
  std::vector<double> times, values;
  for (std::size_t i = 0; i + 1 < s.edges.size(); ++i) {
    times.push_back(s.edges[i]);
    values.push_back(s.signal(s.edges[i]));
  }
  const std::size_t only = static_cast<std::size_t>(u.next() * static_cast<double>(values.size()));
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (single && i != only) continue;
    values[i] = std::clamp(values[i] + 0.05 * D.width() * uniform_in(u, -1.0, 1.0), D.a, D.b);
  }
  RandomSignal out = s;
  out.signal = BiasSignal::piecewise(std::move(times), std::move(values)).with_domain(D);
  return out;
}

}  // namespace

CheckReport check_thm1_lipschitz(const CheckContext& ctx, int n_pairs, std::uint64_t seed,
                                 std::optional<WeightingFunction> w, double tol) {
  CheckReport rep;
  rep.check_name = "thm1_lipschitz";
  rep.seed = seed;
  rep.config = ctx.snapshot();
  const double nu = contraction_rate_nu(ctx.D, ctx.rates).nu;
  const SensitivityBounds g = sensitivity_bounds(ctx.D, ctx.rates);
  const WeightingFunction weight = w.value_or(WeightingFunction::polynomial_exponential(0.5 * nu));
  const AdmissibilityReport adm = weighting_admissible(weight, nu);
  rep.config["n_pairs"] = n_pairs;
  rep.config["nu"] = nu;
  rep.config["g1"] = g.g1;
  rep.config["g2"] = g.g2;
  rep.config["weighting"] = weight.name();
  rep.config["truncation_tol"] = tol;
  if (!adm.admissible) {
    rep.pass = false;
    rep.margin = -1.0;
    rep.worst_case = "weighting not admissible: " + adm.detail;
    return rep;
  }
  const double M = (g.g1 + g.g2 / nu) * adm.integral;
  rep.config["weight_integral"] = adm.integral;
  rep.config["M"] = M;

  UniformStream u(seed, kTagThm1);
  rep.margin = std::numeric_limits<double>::infinity();
  for (int i = 0; i < n_pairs; ++i) {
    const RandomSignal x = random_past_signal(u, ctx.D, nu);
    RandomSignal y = x;
    const char* kind = "identical";
    if (i > 0) {
      switch (i % 3) {
        case 0: y = random_past_signal(u, ctx.D, nu); kind = "independent"; break;
        case 1: y = perturbed(x, u, ctx.D, false); kind = "perturbed"; break;
        default: y = perturbed(x, u, ctx.D, true); kind = "single-segment"; break;
      }
    }
    const double Fx = ct_fading_functional(x.signal, 0.0, ctx.rates, nu, tol);
    const double dF = std::abs(Fx - ct_fading_functional(y.signal, 0.0, ctx.rates, nu, tol));
    if (i == 0) {
      rep.config["identical_difference"] = dF;
      // Same signal with a different value before the truncation horizon.
      const double tc = -truncation_horizon(nu, tol) - 1.0;
      std::vector<double> times{tc - 1.0, tc}, values{0.0, x.signal(tc)};
      values[0] = values[1] - ctx.D.a > ctx.D.b - values[1] ? ctx.D.a : ctx.D.b;
      for (double e : x.edges) {
        if (e > tc && e < 0.0) {
          times.push_back(e);
          values.push_back(x.signal(e));
        }
      }
      const BiasSignal old = BiasSignal::piecewise(std::move(times), std::move(values)).with_domain(ctx.D);
      const double dOld = std::abs(Fx - ct_fading_functional(old, 0.0, ctx.rates, nu, tol));
      rep.config["beyond_horizon_difference"] = dOld;
      if (dOld > tol) {
        rep.margin = -1.0;
        rep.worst_case = "difference beyond the truncation horizon changed F by " + describe(dOld);
      }
    }
    const double bound = M * weighted_distance(x, y, weight) + 2.0 * tol;
    const double m = (bound - dF) / bound;
    if (m < rep.margin) {
      rep.margin = m;
      rep.worst_case = "pair " + std::to_string(i) + " (" + kind + "): |dF| = " + describe(dF) +
                       ", bound = " + describe(bound);
    }
  }
  rep.pass = rep.margin >= 0.0;
  return rep;
}

CheckReport check_thm2_convergence(const CheckContext& ctx, int n_histories, double Ts, std::uint64_t seed,
                                   StepFunction step) {
  CheckReport rep;
  rep.check_name = "thm2_convergence";
  rep.seed = seed;
  rep.config = ctx.snapshot();
  if (!step) {
    const RateFunction rates = ctx.rates;
    step = [rates](double P, double v, double h) { return dt_step(P, v, h, rates); };
  }
  const double nu = contraction_rate_nu(ctx.D, ctx.rates).nu;
  constexpr double floor = 1e-14;
  rep.config["n_histories"] = n_histories;
  rep.config["Ts"] = Ts;
  rep.config["nu"] = nu;
  rep.config["resolution_floor"] = floor;

  UniformStream u(seed, kTagThm2);
  rep.margin = std::numeric_limits<double>::infinity();
  for (int i = 0; i < n_histories; ++i) {
    const RandomSignal s = random_signal(u, ctx.D, nu);
    std::vector<double> samples;
    for (std::size_t e = 0; e + 1 < s.edges.size(); ++e) {
      const long count = std::max(1L, std::lround((s.edges[e + 1] - s.edges[e]) / Ts));
      samples.insert(samples.end(), static_cast<std::size_t>(count), s.signal(s.edges[e]));
    }
    double a = initial_state(i, u);
    double b = i % 4 == 3 ? u.next() : 1.0 - a;
    if (a == b) b = 1.0 - a;
    const double d0 = std::abs(a - b);
    if (d0 == 0.0) continue;
    for (std::size_t k = 0; k < samples.size(); ++k) {
      a = step(a, samples[k], Ts);
      b = step(b, samples[k], Ts);
      const double bound = d0 * std::exp(-nu * Ts * static_cast<double>(k + 1));
      if (bound < floor) break;
      const double m = 1.0 - std::abs(a - b) / (bound * (1.0 + 1e-9));
      if (m < rep.margin) {
        rep.margin = m;
        rep.worst_case = "sequence " + std::to_string(i) + ", k = " + std::to_string(k + 1) +
                         ": |dP_k| = " + describe(std::abs(a - b)) + ", bound = " + describe(bound);
      }
    }
  }

  const AdmissibilityReport good = weighting_admissible(WeightingSequence::polynomial_exponential(0.5 * nu, Ts), nu, Ts);
  const AdmissibilityReport edge = weighting_admissible(WeightingSequence::exponential(nu, Ts), nu, Ts);
  const AdmissibilityReport bad = weighting_admissible(WeightingSequence::exponential(2.0 * nu, Ts), nu, Ts);
  rep.config["c1"] = good.c1;
  rep.config["c2"] = good.c2;
  rep.config["admissible_a_half_nu"] = good.admissible;
  rep.config["admissible_exp_nu"] = edge.admissible;
  rep.config["admissible_exp_2nu"] = bad.admissible;
  const bool verdicts = good.admissible && std::isfinite(good.c1) && std::isfinite(good.c2) &&
                        !edge.admissible && !bad.admissible;
  rep.pass = rep.margin >= 0.0 && verdicts;
  if (rep.margin >= 0.0 && !verdicts) {
    rep.worst_case = "weighting verdicts wrong: " + good.detail;
  }
  return rep;
}

CheckReport check_periodicity(const CheckContext& ctx, const std::vector<double>& frequencies, double offset,
                              double amplitude, double period_factor) {
  CheckReport rep;
  rep.check_name = "periodicity";
  rep.config = ctx.snapshot();
  rep.config["frequencies"] = frequencies;
  rep.config["offset"] = offset;
  rep.config["amplitude"] = amplitude;
  rep.config["period_factor"] = period_factor;
  rep.config["threshold"] = 1e-4;
  double worst = 0.0;
  nlohmann::json per_frequency = nlohmann::json::array();
  for (double f : frequencies) {
    const BiasSignal s = BiasSignal::sinusoid(offset, amplitude, f);
    const DomainBounds range = s.range();
    const double nu = contraction_rate_nu(range, ctx.rates).nu;
    const double T = 1.0 / f;
    // Cycles are delimited by the input phase: compare the first complete
    // input cycle starting at or after the 5/nu transient with its shift.
    const double transient = 5.0 / nu;
    const double t0 = std::ceil(transient / T) * T;
    constexpr int N = 400;
    std::vector<double> times;
    for (int j = 0; j <= N; ++j) times.push_back(t0 + T * j / N);
    for (int j = 0; j <= N; ++j) times.push_back(t0 + T * j / N + period_factor * T);
    std::sort(times.begin(), times.end());
    times.erase(std::unique(times.begin(), times.end()), times.end());
    const Trajectory tr = propagate({0.0, 0.0}, s, times, ctx.rates);
    auto at = [&](double t) {
      const auto it = std::lower_bound(times.begin(), times.end(), t);
      return tr.P_AB(it - times.begin());
    };
    double diff = 0.0;
    for (int j = 0; j <= N; ++j) {
      const double t = t0 + T * j / N;
      diff = std::max(diff, std::abs(at(t + period_factor * T) - at(t)));
    }
    per_frequency.push_back(
        {{"f", f}, {"nu", nu}, {"transient", transient}, {"cycle_start", t0}, {"sup_difference", diff}});
    if (diff >= worst) {
      worst = diff;
      rep.worst_case = "f = " + describe(f) + " Hz: sup |P(t + " + describe(period_factor) + "/f) - P(t)| = " +
                       describe(diff) + " over the cycle starting at " + describe(t0) + " s";
    }
  }
  rep.config["per_frequency"] = per_frequency;
  rep.margin = (1e-4 - worst) / 1e-4;
  rep.pass = rep.margin >= 0.0;
  return rep;
}

// ---------------------------------------------------------------------------
// Suite

nlohmann::json SuiteConfig::to_json() const {
  return {{"n_signals", n_signals},   {"n_pairs", n_pairs},       {"n_histories", n_histories},
          {"Ts", Ts},                 {"steady_grid", steady_grid}, {"horizon_multiplier", horizon_multiplier},
          {"frequencies", frequencies}, {"seed", seed},           {"tol", tol},
          {"rk_tol", rk_tol}};
}

SuiteConfig suite_config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw InvalidArgument("verify: expected a JSON object");
  SuiteConfig c;
  auto integer = [](const nlohmann::json& v, const std::string& key) {
    if (!v.is_number_integer() || v.get<long long>() < 1) {
      throw InvalidArgument("verify." + key + ": expected a positive integer");
    }
    return static_cast<int>(v.get<long long>());
  };
  auto positive = [](const nlohmann::json& v, const std::string& key) {
    if (!v.is_number() || !(v.get<double>() > 0)) throw InvalidArgument("verify." + key + ": expected a number > 0");
    return v.get<double>();
  };
  for (const auto& [key, v] : j.items()) {
    if (key == "n_signals") c.n_signals = integer(v, key);
    else if (key == "n_pairs") c.n_pairs = integer(v, key);
    else if (key == "n_histories") c.n_histories = integer(v, key);
    else if (key == "steady_grid") c.steady_grid = integer(v, key);
    else if (key == "Ts") c.Ts = positive(v, key);
    else if (key == "horizon_multiplier") c.horizon_multiplier = positive(v, key);
    else if (key == "tol") c.tol = positive(v, key);
    else if (key == "rk_tol") c.rk_tol = positive(v, key);
    else if (key == "seed") {
      if (!v.is_number_unsigned()) throw InvalidArgument("verify.seed: expected a non-negative integer");
      c.seed = v.get<std::uint64_t>();
    } else if (key == "frequencies") {
      if (!v.is_array() || v.empty()) throw InvalidArgument("verify.frequencies: expected a non-empty array");
      c.frequencies.clear();
      for (const auto& f : v) c.frequencies.push_back(positive(f, key));
    } else {
      throw InvalidArgument("verify: unknown key \"" + key + "\"");
    }
  }
  if (c.steady_grid < 2) throw InvalidArgument("verify.steady_grid: expected at least 2");
  return c;
}

std::vector<CheckReport> run_suite(const CheckContext& ctx, const SuiteConfig& cfg, int threads) {
  std::vector<double> grid(static_cast<std::size_t>(cfg.steady_grid));
  for (int i = 0; i < cfg.steady_grid; ++i) {
    grid[static_cast<std::size_t>(i)] = ctx.D.a + ctx.D.width() * i / (cfg.steady_grid - 1);
  }
  const std::vector<std::function<CheckReport()>> checks{
      [&] { return check_lemma1_positivity(ctx, cfg.n_signals, cfg.seed); },
      [&] { return check_cor1_bounds(ctx, cfg.n_signals, cfg.seed); },
      [&] { return check_lemma2_decay(ctx, cfg.n_signals, cfg.seed); },
      [&] { return check_cor2_steady_state(ctx, grid, cfg.horizon_multiplier, cfg.rk_tol); },
      [&] { return check_thm1_lipschitz(ctx, cfg.n_pairs, cfg.seed, std::nullopt, cfg.tol); },
      [&] { return check_thm2_convergence(ctx, cfg.n_histories, cfg.Ts, cfg.seed); },
      [&] { return check_periodicity(ctx, cfg.frequencies); },
  };
  std::vector<CheckReport> reports(checks.size());
  parallel_for(checks.size(), threads, [&](std::size_t i) {
    reports[i] = checks[i]();
    reports[i].seed = cfg.seed;
  });
  return reports;
}

nlohmann::json suite_report_json(const std::vector<CheckReport>& reports) {
  nlohmann::json checks = nlohmann::json::array();
  bool all = true;
  for (const auto& r : reports) {
    checks.push_back(r.to_json());
    all = all && r.pass;
  }
  return {{"verdict", all ? "pass" : "fail"}, {"checks", checks}};
}

}  // namespace dms
