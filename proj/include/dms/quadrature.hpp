#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>

#include <Eigen/Core>
#include <nlohmann/json.hpp>

namespace dms {

enum class QuadratureMethod { adaptive_deterministic, monte_carlo };

/// Controls every numerical integral in the transport model.
struct QuadratureSpec {
  QuadratureMethod method = QuadratureMethod::adaptive_deterministic;
  double abs_tol = 1e-10;
  double rel_tol = 1e-8;
  double window_halfwidth = 10.0;  // eV, truncation of the energy axis
  int gh_nodes = 64;
  int mc_samples = 500;
  std::uint64_t seed = 1;
  int max_subdivisions = 4000;

  void validate() const;
  bool operator==(const QuadratureSpec&) const = default;
};

nlohmann::json quadrature_to_json(const QuadratureSpec& q);
/// Strict parse; absent fields keep defaults.
QuadratureSpec quadrature_from_json(const nlohmann::json& j);
const char* to_string(QuadratureMethod m);

struct IntegralResult {
  double value = 0.0;
  double error_estimate = 0.0;
  std::size_t evaluations = 0;
  double standard_error = 0.0;  // Monte Carlo only
};

using Integrand = std::function<double(double)>;

/// Globally adaptive Gauss-Kronrod (7/15) on [a, b]. The panel with the
/// largest embedded error is bisected until the summed estimate satisfies
/// error <= max(abs_tol, rel_tol * |value|). Throws NonConvergence when
/// `max_subdivisions` panels are in use and the target is still missed.
IntegralResult integrate_interval(const Integrand& f, double a, double b, double abs_tol,
                                  double rel_tol, int max_subdivisions = 4000,
                                  std::span<const double> breakpoints = {});

/// Declares the integrand as g(E) * Lorentzian(E; center, width) with g
/// settling to constants outside the window.
struct LorentzianTail {
  double center;
  double width;
};

/// Integral over the real line, truncated to [center - W, center + W] with
/// W = spec.window_halfwidth. Interior breakpoints split the initial panels.
/// With a LorentzianTail the analytic mass beyond each window edge, weighted
/// by g at that edge, is added to the value; the change of g across the outer
/// half of the window times that mass is added to the error estimate.
IntegralResult integrate_line(const Integrand& f, double center, const QuadratureSpec& spec,
                              std::span<const double> breakpoints = {},
                              std::optional<LorentzianTail> tail = std::nullopt);

/// Gauss-Hermite rule for the weight exp(-x^2).
struct GaussHermiteRule {
  Eigen::VectorXd nodes;
  Eigen::VectorXd weights;
};

/// Golub-Welsch eigen-decomposition polished by Newton steps on the
/// orthonormal Hermite recurrence. Rules are cached per order.
const GaussHermiteRule& gauss_hermite_rule(int order);

/// E[g(X)] for X ~ Normal(mean, sd^2). The deterministic method uses
/// spec.gh_nodes Gauss-Hermite nodes; Monte Carlo averages spec.mc_samples
/// draws from the stream (spec.seed, tag) and reports the standard error.
IntegralResult gauss_expectation(const Integrand& g, double mean, double sd,
                                 const QuadratureSpec& spec, std::uint64_t tag = 0);

}  // namespace dms
