#pragma once

// Scalar physics primitives of the switch model. Each is templated on the
// floating type so the same expressions serve double-precision production
// code and extended-precision reference evaluation.

#include <cmath>

#include "dms/constants.hpp"
#include "dms/error.hpp"
#include "dms/params.hpp"

namespace dms {

/// Sign inside the lead Fermi function f±(E)(v) = 1 / (1 + exp((E ± v/2) / kB T)).
enum class Branch { plus, minus };

/// Bridge occupancy index s of the Marcus rate R_{PT,±s}: s = 1 weights the
/// empty bridge, s = 0 the occupied one.
enum class Occupancy { occupied = 0, empty = 1 };

template <class Scalar>
Scalar fermi(Scalar energy, Scalar bias, Branch branch, Scalar temperature) {
  using std::exp;
  using std::isfinite;
  if (!isfinite(energy) || !isfinite(bias) || !isfinite(temperature)) {
    throw InvalidArgument("fermi: non-finite argument");
  }
  if (!(temperature > 0)) throw InvalidArgument("fermi: temperature must be > 0");
  const Scalar shift = branch == Branch::plus ? bias / 2 : -bias / 2;
  const Scalar x = (energy + shift) / (Scalar(constants::boltzmann) * temperature);
  // Branch on the sign so exp never overflows.
  if (x > 0) {
    const Scalar e = exp(-x);
    return e / (1 + e);
  }
  return 1 / (1 + exp(x));
}

/// Lorentzian density of states with full width `width` centred on `center`.
template <class Scalar>
Scalar lorentzian_dos(Scalar energy, Scalar center, Scalar width) {
  if (!(width > 0)) throw InvalidArgument("lorentzian_dos: width must be > 0");
  const Scalar d = energy - center;
  const Scalar hw = width / 2;
  return (width / (2 * Scalar(constants::pi))) / (d * d + hw * hw);
}

/// Probability mass of the Lorentzian outside [center - halfwidth, center + halfwidth]
/// on one side.
template <class Scalar>
Scalar lorentzian_tail_mass(Scalar halfwidth, Scalar width) {
  using std::atan;
  return Scalar(0.5) - atan(2 * halfwidth / width) / Scalar(constants::pi);
}

template <class Scalar>
Scalar gaussian_density(Scalar x, Scalar mean, Scalar sd) {
  using std::exp;
  using std::sqrt;
  if (!(sd > 0)) throw InvalidArgument("gaussian_density: sd must be > 0");
  const Scalar z = (x - mean) / sd;
  return exp(-z * z / 2) / (sqrt(2 * Scalar(constants::pi)) * sd);
}

/// Marcus proton-transfer rate R_{PT,±s}(v) in s^-1.
template <class Scalar>
Scalar marcus_rate(Scalar bias, Branch sign, Occupancy s, const SwitchParams& p) {
  using std::exp;
  using std::sqrt;
  const Scalar kT = Scalar(constants::boltzmann) * Scalar(p.T);
  const Scalar lambda(p.lambda);
  const Scalar gamma(p.gamma);
  const Scalar alpha = s == Occupancy::empty ? bias - Scalar(p.E_PT)
                                             : bias - Scalar(p.E_PT) - Scalar(p.chi);
  const Scalar gamma_s = s == Occupancy::empty ? gamma : Scalar(p.kappa) * gamma;
  const Scalar offset = sign == Branch::plus ? alpha + lambda : alpha - lambda;
  const Scalar scale =
      p.marcus_denominator == MarcusDenominator::as_printed ? gamma_s : lambda;
  const Scalar prefactor = gamma / 2 * sqrt(Scalar(constants::pi) * kT / lambda);
  return prefactor * exp(-offset * offset / (4 * kT * scale));
}

}  // namespace dms
