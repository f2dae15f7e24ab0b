#include "dms/rates.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <boost/math/tools/minima.hpp>

#include "dms/constants.hpp"
#include "dms/error.hpp"
#include "dms/parallel.hpp"
#include "dms/physics.hpp"
#include "dms/transport.hpp"

namespace dms {

RateSet rates_from_bridge(double v, double b_AB, double b_ABbar, const SwitchParams& p) {
  RateSet r;
  r.v = v;
  r.k01 = (1.0 - b_AB) * marcus_rate(v, Branch::plus, Occupancy::empty, p) +
          b_AB * marcus_rate(v, Branch::plus, Occupancy::occupied, p);
  r.k10 = (1.0 - b_ABbar) * marcus_rate(v, Branch::minus, Occupancy::empty, p) +
          b_ABbar * marcus_rate(v, Branch::minus, Occupancy::occupied, p);
  r.K = r.k01 + r.k10;
  r.A = -r.K;
  return r;
}

RateSet rate_set(double v, const SwitchParams& p, const QuadratureSpec& q) {
  const BridgePopulation b = bridge_populations(v, p, q);
  return rates_from_bridge(v, b.b_AB, b.b_ABbar, p);
}

RateFunction direct_rates(const SwitchParams& p, const QuadratureSpec& q) {
  p.validate();
  q.validate();
  return [p, q](double v) { return rate_set(v, p, q); };
}

namespace {

constexpr int kN = BridgeTable::kNodes;

double lobatto_node(int j) { return std::cos(constants::pi * j / (kN - 1)); }

// Barycentric interpolation on the Chebyshev-Lobatto nodes of [-1, 1].
double barycentric(const std::vector<double>& y, double x) {
  double num = 0.0, den = 0.0;
  for (int j = 0; j < kN; ++j) {
    const double d = x - lobatto_node(j);
    if (d == 0.0) return y[j];
    double w = (j % 2 == 0) ? 1.0 : -1.0;
    if (j == 0 || j == kN - 1) w *= 0.5;
    num += w / d * y[j];
    den += w / d;
  }
  return num / den;
}

}  // namespace

BridgeTable::BridgeTable(double lo, double hi, const SwitchParams& p, const QuadratureSpec& q,
                         double tol, int threads)
    : lo_(lo), hi_(hi) {
  if (!(std::isfinite(lo) && std::isfinite(hi) && lo < hi)) {
    throw InvalidArgument("BridgeTable: requires finite lo < hi");
  }
  if (!(tol > 0)) throw InvalidArgument("BridgeTable: tol must be > 0");
  p.validate();
  q.validate();
  constexpr double kMaxPanel = 0.125;
  constexpr double kMinPanel = 1.0 / 1024;

  std::vector<std::pair<double, double>> pending;
  const int initial = std::max(1, static_cast<int>(std::ceil((hi - lo) / kMaxPanel)));
  for (int i = 0; i < initial; ++i) {
    pending.emplace_back(lo + (hi - lo) * i / initial,
                         i + 1 == initial ? hi : lo + (hi - lo) * (i + 1) / initial);
  }

  while (!pending.empty()) {
    // Each round evaluates all pending panels in parallel: nodes plus the
    // midpoints used for validation.
    const std::size_t m = pending.size();
    constexpr int kPoints = 2 * kN - 1;
    std::vector<BridgePopulation> values(m * kPoints);
    parallel_for(m * kPoints, threads, [&](std::size_t job) {
      const auto [a, b] = pending[job / kPoints];
      const int k = static_cast<int>(job % kPoints);
      // Even k: node k/2; odd k: midpoint between nodes (k-1)/2 and (k+1)/2.
      const double x = k % 2 == 0 ? lobatto_node(k / 2)
                                  : 0.5 * (lobatto_node((k - 1) / 2) + lobatto_node((k + 1) / 2));
      values[job] = bridge_populations(0.5 * (a + b) + 0.5 * (b - a) * x, p, q);
    });

    std::vector<std::pair<double, double>> next;
    for (std::size_t i = 0; i < m; ++i) {
      Panel panel{pending[i].first, pending[i].second, {}, {}};
      for (int j = 0; j < kN; ++j) {
        panel.b_AB.push_back(values[i * kPoints + 2 * j].b_AB);
        panel.b_ABbar.push_back(values[i * kPoints + 2 * j].b_ABbar);
      }
      double err = 0.0;
      for (int j = 0; j + 1 < kN; ++j) {
        const double x = 0.5 * (lobatto_node(j) + lobatto_node(j + 1));
        const BridgePopulation& ref = values[i * kPoints + 2 * j + 1];
        err = std::max({err, std::abs(barycentric(panel.b_AB, x) - ref.b_AB),
                        std::abs(barycentric(panel.b_ABbar, x) - ref.b_ABbar)});
      }
      const double width = panel.b - panel.a;
      if (err > tol && width > kMinPanel) {
        const double mid = 0.5 * (panel.a + panel.b);
        next.emplace_back(panel.a, mid);
        next.emplace_back(mid, panel.b);
      } else {
        panels_.push_back(std::move(panel));
      }
    }
    pending = std::move(next);
  }
  std::sort(panels_.begin(), panels_.end(),
            [](const Panel& x, const Panel& y) { return x.a < y.a; });
}

std::pair<double, double> BridgeTable::operator()(double v) const {
  if (!(v >= lo_ && v <= hi_)) {
    std::ostringstream msg;
    msg << "BridgeTable: v = " << v << " outside [" << lo_ << ", " << hi_ << "]";
    throw InvalidArgument(msg.str());
  }
  auto it = std::upper_bound(panels_.begin(), panels_.end(), v,
                             [](double x, const Panel& panel) { return x < panel.a; });
  const Panel& panel = *std::prev(it);
  const double x = std::clamp((2.0 * v - panel.a - panel.b) / (panel.b - panel.a), -1.0, 1.0);
  return {barycentric(panel.b_AB, x), barycentric(panel.b_ABbar, x)};
}

RateFunction tabulated_rates(const SwitchParams& p, const QuadratureSpec& q, const DomainBounds& D,
                             double margin, double tol, int threads) {
  if (!(margin > 0)) throw InvalidArgument("tabulated_rates: margin must be > 0");
  auto table = std::make_shared<const BridgeTable>(D.a - margin, D.b + margin, p, q, tol, threads);
  return [table, p](double v) {
    const auto [b_AB, b_ABbar] = (*table)(v);
    return rates_from_bridge(v, b_AB, b_ABbar, p);
  };
}

namespace {

std::vector<double> grid_points(const DomainBounds& D, int grid) {
  if (grid < 2) throw InvalidArgument("grid must have at least 2 points");
  if (D.width() == 0.0) return {D.a};
  std::vector<double> v(grid);
  for (int i = 0; i < grid; ++i) v[i] = i + 1 == grid ? D.b : D.a + D.width() * i / (grid - 1);
  return v;
}

// Maximises/minimises h over [lo, hi] with Brent's method; returns (x, h(x)).
template <class F>
std::pair<double, double> brent_minimum(F&& h, double lo, double hi) {
  if (!(hi > lo)) return {lo, h(lo)};
  std::uintmax_t iterations = 200;
  return boost::math::tools::brent_find_minima(h, lo, hi, 40, iterations);
}

}  // namespace

ContractionRate contraction_rate_nu(const DomainBounds& D, const RateFunction& rates, int grid) {
  const std::vector<double> v = grid_points(D, grid);
  std::vector<double> K(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) K[i] = rates(v[i]).K;
  const auto i = static_cast<std::size_t>(std::min_element(K.begin(), K.end()) - K.begin());

  ContractionRate out{K[i], v[i]};
  if (v.size() > 1) {
    const double lo = v[i == 0 ? 0 : i - 1];
    const double hi = v[std::min(i + 1, v.size() - 1)];
    const auto [x, k] = brent_minimum([&](double s) { return rates(s).K; }, lo, hi);
    if (k < out.nu) out = {k, x};
  }
  if (!(out.nu >= constants::contraction_guard)) {
    std::ostringstream msg;
    msg << "degenerate contraction: min K = " << out.nu << " s^-1 at v = " << out.argmin
        << " is below the guard " << constants::contraction_guard;
    throw DegenerateContraction(msg.str());
  }
  return out;
}

ContractionRate contraction_rate_nu(const DomainBounds& D, const SwitchParams& p,
                                    const QuadratureSpec& q, int grid) {
  return contraction_rate_nu(D, direct_rates(p, q), grid);
}

RateDerivatives rate_derivatives(double v, const RateFunction& rates, double h) {
  if (!(h > 0)) throw InvalidArgument("rate_derivatives: step must be > 0");
  auto central = [&](double step) {
    const RateSet up = rates(v + step);
    const RateSet dn = rates(v - step);
    return RateDerivatives{(up.k01 - dn.k01) / (2 * step), (up.k10 - dn.k10) / (2 * step),
                           (up.A - dn.A) / (2 * step)};
  };
  const RateDerivatives coarse = central(h);
  const RateDerivatives fine = central(0.5 * h);
  auto pick = [](double c, double f) {
    const double scale = std::max(std::abs(c), std::abs(f));
    if (std::abs(c - f) <= 0.01 * scale) return f;
    return (4.0 * f - c) / 3.0;  // Richardson: error is O(h^2)
  };
  return {pick(coarse.dk01, fine.dk01), pick(coarse.dk10, fine.dk10), pick(coarse.dA, fine.dA)};
}

SensitivityBounds sensitivity_bounds(const DomainBounds& D, const RateFunction& rates, int grid,
                                     double h) {
  const std::vector<double> v = grid_points(D, grid);
  std::vector<RateDerivatives> d(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) d[i] = rate_derivatives(v[i], rates, h);

  SensitivityBounds out;
  std::size_t i1 = 0, i2 = 0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (std::abs(d[i].dk01) > std::abs(d[i1].dk01)) i1 = i;
    if (std::abs(d[i].dA) > std::abs(d[i2].dA)) i2 = i;
    out.max_dk10 = std::max(out.max_dk10, std::abs(d[i].dk10));
  }
  out.g1 = std::abs(d[i1].dk01);
  out.argmax_g1 = v[i1];
  out.g2 = std::abs(d[i2].dA);
  out.argmax_g2 = v[i2];

  if (v.size() > 1) {
    auto refine = [&](std::size_t i, auto component, double& best, double& arg) {
      const double lo = v[i == 0 ? 0 : i - 1];
      const double hi = v[std::min(i + 1, v.size() - 1)];
      const auto [x, neg] = brent_minimum(
          [&](double s) { return -std::abs(component(rate_derivatives(s, rates, h))); }, lo, hi);
      if (-neg > best) {
        best = -neg;
        arg = x;
      }
    };
    refine(i1, [](const RateDerivatives& r) { return r.dk01; }, out.g1, out.argmax_g1);
    refine(i2, [](const RateDerivatives& r) { return r.dA; }, out.g2, out.argmax_g2);
  }
  return out;
}

SensitivityBounds sensitivity_bounds(const DomainBounds& D, const SwitchParams& p,
                                     const QuadratureSpec& q, int grid) {
  return sensitivity_bounds(D, direct_rates(p, q), grid);
}

}  // namespace dms
