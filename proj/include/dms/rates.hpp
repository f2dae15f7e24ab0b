#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "dms/domain.hpp"
#include "dms/params.hpp"
#include "dms/quadrature.hpp"

namespace dms {

/// Switching rates at one bias point, all in s^-1.
struct RateSet {
  double v = 0.0;
  double k01 = 0.0;
  double k10 = 0.0;
  double A = 0.0;  // -(k01 + k10)
  double K = 0.0;  // k01 + k10
};

/// Assembles k01/k10 from given bridge populations and the Marcus rates.
RateSet rates_from_bridge(double v, double b_AB, double b_ABbar, const SwitchParams& p);

/// Full evaluation: both bridge populations by quadrature, then the Marcus combination.
RateSet rate_set(double v, const SwitchParams& p, const QuadratureSpec& q);

/// Any bias -> RateSet map. The dynamics and verification layers take one of
/// these so that alternative rate sources (tables, fault-injecting doubles)
/// can be substituted without touching the propagators.
using RateFunction = std::function<RateSet(double)>;

/// Uncached rate_set.
RateFunction direct_rates(const SwitchParams& p, const QuadratureSpec& q);

/// Piecewise Chebyshev-Lobatto interpolant of both bridge populations over
/// [lo, hi]. Panels are split until the interpolant matches direct quadrature
/// to `tol` at every midpoint between nodes. Immutable once built.
class BridgeTable {
 public:
  BridgeTable(double lo, double hi, const SwitchParams& p, const QuadratureSpec& q,
              double tol = 1e-10, int threads = 1);

  /// (b_AB, b_ABbar); throws outside [lo, hi].
  std::pair<double, double> operator()(double v) const;
  double lo() const { return lo_; }
  double hi() const { return hi_; }
  std::size_t panels() const { return panels_.size(); }

  static constexpr int kNodes = 17;

 private:
  struct Panel {
    double a, b;
    std::vector<double> b_AB, b_ABbar;
  };
  double lo_, hi_;
  std::vector<Panel> panels_;
};

/// Rates with bridge populations read from a BridgeTable covering D widened by
/// `margin` on each side; the Marcus factors are still evaluated exactly.
RateFunction tabulated_rates(const SwitchParams& p, const QuadratureSpec& q, const DomainBounds& D,
                             double margin = 0.01, double tol = 1e-10, int threads = 1);

struct ContractionRate {
  double nu = 0.0;      // min K over D, s^-1
  double argmin = 0.0;  // V
};

/// min_{v in D} K(v): dense grid, then Brent refinement around the grid
/// minimiser. Throws DegenerateContraction when the minimum is below
/// constants::contraction_guard.
ContractionRate contraction_rate_nu(const DomainBounds& D, const RateFunction& rates,
                                    int grid = 2001);
ContractionRate contraction_rate_nu(const DomainBounds& D, const SwitchParams& p,
                                    const QuadratureSpec& q, int grid = 2001);

struct RateDerivatives {
  double dk01 = 0.0;
  double dk10 = 0.0;
  double dA = 0.0;
};

/// Central differences with step h. When the h and h/2 estimates of any
/// component disagree by more than 1 %, the Richardson extrapolation of the
/// pair is returned instead.
RateDerivatives rate_derivatives(double v, const RateFunction& rates, double h = 1e-4);

struct SensitivityBounds {
  double g1 = 0.0;  // max |dk01/dv| over D, s^-1 V^-1
  double g2 = 0.0;  // max |dA/dv| over D
  double argmax_g1 = 0.0;
  double argmax_g2 = 0.0;
  double max_dk10 = 0.0;
};

SensitivityBounds sensitivity_bounds(const DomainBounds& D, const RateFunction& rates,
                                     int grid = 2001, double h = 1e-4);
SensitivityBounds sensitivity_bounds(const DomainBounds& D, const SwitchParams& p,
                                     const QuadratureSpec& q, int grid = 2001);

}  // namespace dms
