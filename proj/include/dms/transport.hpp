#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "dms/params.hpp"
#include "dms/quadrature.hpp"

namespace boost::math::interpolators {
template <class RandomAccessContainer>
class pchip;
}

namespace dms {

struct BridgePopulation {
  double v = 0.0;
  double b_AB = 0.0;
  double b_ABbar = 0.0;
};

/// Average bridge population <b_n>(v) of one state: the lead-weighted Fermi
/// occupation integrated against the bias-shifted Lorentzian level. Results
/// overshooting [0, 1] by at most spec.abs_tol are clamped; larger overshoot
/// signals a quadrature fault and throws.
double bridge_population(double v, State state, const SwitchParams& p, const QuadratureSpec& spec);
BridgePopulation bridge_populations(double v, const SwitchParams& p, const QuadratureSpec& spec);

/// Default Monte Carlo stream tag for a (bias, state) evaluation point.
std::uint64_t current_tag(double v, State state);

/// Landauer current of one state in amperes, with the Gaussian level
/// distribution handled by gauss_expectation over the inner energy integral.
/// The IntegralResult carries the Monte Carlo standard error, scaled to A.
IntegralResult state_current_result(double v, State state, const SwitchParams& p,
                                    const QuadratureSpec& spec, std::uint64_t tag);
IntegralResult state_current_result(double v, State state, const SwitchParams& p,
                                    const QuadratureSpec& spec);
double state_current(double v, State state, const SwitchParams& p, const QuadratureSpec& spec);

/// I_AB P_AB + I_ABbar (1 - P_AB).
double average_current(double v, double P_AB, const SwitchParams& p, const QuadratureSpec& spec);
double average_current(double I_AB, double I_ABbar, double P_AB);

/// Currents of both states tabulated on an ascending bias grid and
/// interpolated with a monotone piecewise cubic (PCHIP). Immutable once built.
class CurrentTable {
 public:
  static CurrentTable build(const Eigen::VectorXd& v_grid, const SwitchParams& p,
                            const QuadratureSpec& spec, int threads = 1);
  /// Takes already computed node values (e.g. read back from CSV).
  CurrentTable(Eigen::VectorXd v_grid, Eigen::VectorXd I_AB, Eigen::VectorXd I_ABbar,
               QuadratureSpec build_spec);

  /// (I_AB, I_ABbar) at v; v outside the grid throws.
  std::pair<double, double> lookup(double v) const;

  const Eigen::VectorXd& v_grid() const { return v_grid_; }
  const Eigen::VectorXd& I_AB() const { return I_AB_; }
  const Eigen::VectorXd& I_ABbar() const { return I_ABbar_; }
  const QuadratureSpec& build_spec() const { return spec_; }

  /// CSV with '#'-prefixed build_spec lines followed by the header v,I_AB,I_ABbar.
  void write_csv(std::ostream& out) const;
  static CurrentTable read_csv(std::istream& in);

 private:
  using Pchip = boost::math::interpolators::pchip<std::vector<double>>;
  Eigen::VectorXd v_grid_, I_AB_, I_ABbar_;
  QuadratureSpec spec_;
  // Shared, immutable interpolants over the node data.
  std::shared_ptr<const Pchip> spline_AB_, spline_ABbar_;
};

}  // namespace dms
