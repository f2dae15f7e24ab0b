#include "dms/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <queue>
#include <sstream>
#include <vector>

#include <Eigen/Eigenvalues>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "dms/error.hpp"
#include "dms/normal_stream.hpp"
#include "dms/physics.hpp"

namespace dms {

void QuadratureSpec::validate() const {
  auto fail = [](const char* what) { throw InvalidArgument(std::string("QuadratureSpec: ") + what); };
  if (!(abs_tol > 0) || !(rel_tol > 0)) fail("tolerances must be > 0");
  if (!(window_halfwidth > 0) || !std::isfinite(window_halfwidth)) fail("window_halfwidth must be > 0");
  if (gh_nodes < 2) fail("gh_nodes must be >= 2");
  if (mc_samples < 1) fail("mc_samples must be >= 1");
  if (max_subdivisions < 1) fail("max_subdivisions must be >= 1");
}

const char* to_string(QuadratureMethod m) {
  return m == QuadratureMethod::monte_carlo ? "monte-carlo" : "adaptive-deterministic";
}

nlohmann::json quadrature_to_json(const QuadratureSpec& q) {
  return {{"method", to_string(q.method)},
          {"abs_tol", q.abs_tol},
          {"rel_tol", q.rel_tol},
          {"window_halfwidth", q.window_halfwidth},
          {"gh_nodes", q.gh_nodes},
          {"mc_samples", q.mc_samples},
          {"seed", q.seed},
          {"max_subdivisions", q.max_subdivisions}};
}

QuadratureSpec quadrature_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw InvalidArgument("quadrature: expected a JSON object");
  QuadratureSpec q;
  auto number = [](const nlohmann::json& v, const std::string& key) {
    if (!v.is_number()) throw InvalidArgument("quadrature." + key + ": expected a number");
    return v.get<double>();
  };
  auto integer = [](const nlohmann::json& v, const std::string& key) {
    if (!v.is_number_integer()) throw InvalidArgument("quadrature." + key + ": expected an integer");
    return v.get<long long>();
  };
  for (const auto& [key, v] : j.items()) {
    if (key == "method") {
      const auto s = v.is_string() ? v.get<std::string>() : std::string();
      if (s == "adaptive-deterministic") q.method = QuadratureMethod::adaptive_deterministic;
      else if (s == "monte-carlo") q.method = QuadratureMethod::monte_carlo;
      else throw InvalidArgument("quadrature.method: expected \"adaptive-deterministic\" or \"monte-carlo\"");
    } else if (key == "abs_tol") q.abs_tol = number(v, key);
    else if (key == "rel_tol") q.rel_tol = number(v, key);
    else if (key == "window_halfwidth") q.window_halfwidth = number(v, key);
    else if (key == "gh_nodes") q.gh_nodes = static_cast<int>(integer(v, key));
    else if (key == "mc_samples") q.mc_samples = static_cast<int>(integer(v, key));
    else if (key == "seed") {
      if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0)) {
        throw InvalidArgument("quadrature.seed: expected a non-negative integer");
      }
      q.seed = v.get<std::uint64_t>();
    } else if (key == "max_subdivisions") q.max_subdivisions = static_cast<int>(integer(v, key));
    else throw InvalidArgument("quadrature: unknown key \"" + key + "\"");
  }
  q.validate();
  return q;
}

namespace {

using Kronrod15 = boost::math::quadrature::gauss_kronrod<double, 15>;

struct Panel {
  double a, b, value, error;
  bool operator<(const Panel& other) const { return error < other.error; }
};

Panel evaluate_panel(const Integrand& f, double a, double b, std::size_t& evaluations) {
  double err = 0.0;
  // max_depth = 0: one 15-point Kronrod panel with its embedded 7-point Gauss estimate.
  const double value = Kronrod15::integrate(f, a, b, 0, 0.0, &err);
  evaluations += 15;
  if (!std::isfinite(value)) {
    std::ostringstream msg;
    msg << "integrate_interval: non-finite integrand on [" << a << ", " << b << "]";
    throw InvalidArgument(msg.str());
  }
  return {a, b, value, err};
}

}  // namespace

IntegralResult integrate_interval(const Integrand& f, double a, double b, double abs_tol,
                                  double rel_tol, int max_subdivisions,
                                  std::span<const double> breakpoints) {
  if (!(a <= b)) throw InvalidArgument("integrate_interval: requires a <= b");
  IntegralResult result;
  if (a == b) return result;

  std::vector<double> edges{a};
  for (double x : breakpoints) {
    if (x > a && x < b) edges.push_back(x);
  }
  edges.push_back(b);
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());

  std::priority_queue<Panel> active;
  std::vector<Panel> frozen;
  double value = 0.0;
  double error = 0.0;
  for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
    Panel p = evaluate_panel(f, edges[i], edges[i + 1], result.evaluations);
    value += p.value;
    error += p.error;
    active.push(p);
  }

  auto target = [&] { return std::max(abs_tol, rel_tol * std::abs(value)); };
  while (error > target() && !active.empty()) {
    if (static_cast<int>(active.size() + frozen.size()) >= max_subdivisions) {
      throw NonConvergence("integrate_interval: subdivision limit reached", value, error);
    }
    Panel worst = active.top();
    active.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    if (!(mid > worst.a && mid < worst.b)) {
      // Panel is at floating-point resolution; keep its contribution as is.
      frozen.push_back(worst);
      continue;
    }
    Panel left = evaluate_panel(f, worst.a, mid, result.evaluations);
    Panel right = evaluate_panel(f, mid, worst.b, result.evaluations);
    value += left.value + right.value - worst.value;
    error += left.error + right.error - worst.error;
    active.push(left);
    active.push(right);
  }

  // Resum to shed the drift of the incremental updates.
  value = 0.0;
  error = 0.0;
  for (const auto& p : frozen) {
    value += p.value;
    error += p.error;
  }
  while (!active.empty()) {
    value += active.top().value;
    error += active.top().error;
    active.pop();
  }
  if (error > std::max(abs_tol, rel_tol * std::abs(value))) {
    throw NonConvergence("integrate_interval: tolerance not reached at floating-point resolution",
                         value, error);
  }
  result.value = value;
  result.error_estimate = error;
  return result;
}

IntegralResult integrate_line(const Integrand& f, double center, const QuadratureSpec& spec,
                              std::span<const double> breakpoints,
                              std::optional<LorentzianTail> tail) {
  spec.validate();
  const double lo = center - spec.window_halfwidth;
  const double hi = center + spec.window_halfwidth;
  std::vector<double> bps(breakpoints.begin(), breakpoints.end());
  bps.push_back(center);
  IntegralResult r =
      integrate_interval(f, lo, hi, spec.abs_tol, spec.rel_tol, spec.max_subdivisions, bps);

  if (tail) {
    // Mass of the Lorentzian beyond each window edge, weighted by the smooth
    // factor g = f / L evaluated at that edge.
    const double mass_lo = lorentzian_tail_mass(tail->center - lo, tail->width);
    const double mass_hi = lorentzian_tail_mass(hi - tail->center, tail->width);
    auto smooth = [&](double e) { return f(e) / lorentzian_dos(e, tail->center, tail->width); };
    const double half = 0.5 * spec.window_halfwidth;
    const double g_lo = smooth(lo);
    const double g_hi = smooth(hi);
    const double g_lo_in = smooth(lo + half);
    const double g_hi_in = smooth(hi - half);
    r.evaluations += 4;
    r.value += g_lo * mass_lo + g_hi * mass_hi;
    r.error_estimate += std::abs(g_lo - g_lo_in) * mass_lo + std::abs(g_hi - g_hi_in) * mass_hi;
  }
  return r;
}

namespace {

GaussHermiteRule build_gauss_hermite(int n) {
  // Jacobi matrix of the Hermite weight exp(-x^2).
  Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(n, n);
  for (int k = 1; k < n; ++k) {
    jacobi(k, k - 1) = jacobi(k - 1, k) = std::sqrt(0.5 * k);
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(jacobi);
  Eigen::VectorXd x = solver.eigenvalues();

  // psi_k: orthonormal Hermite functions w.r.t. exp(-x^2).
  auto recurrence = [n](double xi, double& psi_n, double& psi_nm1) {
    double p0 = 1.0 / std::pow(std::numbers::pi, 0.25);
    double p1 = std::numbers::sqrt2 * xi * p0;
    if (n == 1) {
      psi_n = p1;
      psi_nm1 = p0;
      return;
    }
    for (int k = 1; k < n; ++k) {
      const double p2 = xi * std::sqrt(2.0 / (k + 1)) * p1 - std::sqrt(static_cast<double>(k) / (k + 1)) * p0;
      p0 = p1;
      p1 = p2;
    }
    psi_n = p1;
    psi_nm1 = p0;
  };

  GaussHermiteRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  for (int i = 0; i < n; ++i) {
    double xi = x(i);
    double psi_n = 0.0, psi_nm1 = 0.0;
    for (int it = 0; it < 3; ++it) {
      recurrence(xi, psi_n, psi_nm1);
      xi -= psi_n / (std::sqrt(2.0 * n) * psi_nm1);
    }
    recurrence(xi, psi_n, psi_nm1);
    rule.nodes(i) = xi;
    rule.weights(i) = 1.0 / (n * psi_nm1 * psi_nm1);
  }
  return rule;
}

}  // namespace

const GaussHermiteRule& gauss_hermite_rule(int order) {
  if (order < 1) throw InvalidArgument("gauss_hermite_rule: order must be >= 1");
  static std::mutex mutex;
  static std::map<int, GaussHermiteRule> cache;
  std::lock_guard lock(mutex);
  auto it = cache.find(order);
  if (it == cache.end()) it = cache.emplace(order, build_gauss_hermite(order)).first;
  return it->second;
}

IntegralResult gauss_expectation(const Integrand& g, double mean, double sd,
                                 const QuadratureSpec& spec, std::uint64_t tag) {
  spec.validate();
  if (!(sd > 0)) throw InvalidArgument("gauss_expectation: sd must be > 0");
  IntegralResult r;
  auto eval = [&](double node) {
    const double y = g(node);
    ++r.evaluations;
    if (!std::isfinite(y)) {
      std::ostringstream msg;
      msg.precision(17);
      msg << "gauss_expectation: non-finite integrand at node E' = " << node;
      throw InvalidArgument(msg.str());
    }
    return y;
  };

  if (spec.method == QuadratureMethod::adaptive_deterministic) {
    const GaussHermiteRule& rule = gauss_hermite_rule(spec.gh_nodes);
    double sum = 0.0;
    for (Eigen::Index i = 0; i < rule.nodes.size(); ++i) {
      sum += rule.weights(i) * eval(mean + sd * std::numbers::sqrt2 * rule.nodes(i));
    }
    r.value = sum / std::sqrt(std::numbers::pi);
    return r;
  }

  NormalStream stream(spec.seed, tag);
  const int n = spec.mc_samples;
  // Welford accumulation of mean and variance.
  double m = 0.0, s2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double y = eval(mean + sd * stream.next());
    const double d = y - m;
    m += d / (i + 1);
    s2 += d * (y - m);
  }
  r.value = m;
  r.standard_error = n > 1 ? std::sqrt(s2 / (n - 1) / n) : 0.0;
  r.error_estimate = r.standard_error;
  return r;
}

}  // namespace dms
