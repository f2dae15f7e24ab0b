#pragma once

#include <nlohmann/json.hpp>

#include "dms/constants.hpp"

namespace dms {

/// Redox state of the junction molecule: AB is the non-protonated (on)
/// state, ABbar the protonated (off) state.
enum class State { AB, ABbar };

/// Which energy scale divides the Marcus exponent.
///  - as_printed:          4 kB T gamma_s  (gamma_1 = gamma, gamma_0 = kappa gamma)
///  - conventional_lambda: 4 kB T lambda
enum class MarcusDenominator { as_printed, conventional_lambda };

/// Device parameters of the one-state switch. Energies are stored in eV,
/// the proton-transfer coupling `gamma` in s^-1. Defaults are the reference
/// device at room temperature.
struct SwitchParams {
  double gammaL_AB = 4e-3;       // eV, left-lead tunneling rate
  double gammaR_AB = 100.25e-3;  // eV, right-lead tunneling rate
  double kappa = 5.44;           // protonated/non-protonated width ratio
  double chi = 2.1;              // eV, level shift on protonation
  double E_AB = 0.66;            // eV
  double E_PT = -0.513;          // eV
  double lambda = 1.0;           // eV, reorganization energy
  double gamma = 5.74;           // s^-1, molecule-surroundings coupling
  double eta = 0.6;              // voltage division
  double sigma = 0.01;           // eV, Gaussian level broadening
  int N = 150;                   // molecules in the junction
  double T = 298.15;             // K
  double Gamma_AB = 1e-5;        // eV, current-magnitude coupling
  MarcusDenominator marcus_denominator = MarcusDenominator::as_printed;

  double thermal_energy() const { return constants::boltzmann * T; }

  double tunneling_left(State s) const { return scale(s) * gammaL_AB; }
  double tunneling_right(State s) const { return scale(s) * gammaR_AB; }
  /// Lorentzian level width gamma_L + gamma_R of the given state (eV).
  double level_width(State s) const { return tunneling_left(s) + tunneling_right(s); }
  double level_energy(State s) const { return s == State::AB ? E_AB : E_AB + chi; }
  double current_coupling(State s) const { return scale(s) * Gamma_AB; }
  /// Standard deviation of the level-energy distribution; one sigma serves both states.
  double level_broadening(State) const { return sigma; }

  /// Throws InvalidArgument naming the first violated constraint.
  void validate() const;

  bool operator==(const SwitchParams&) const = default;

 private:
  double scale(State s) const { return s == State::AB ? 1.0 : kappa; }
};

/// Serialized keys follow the reference parameter table: Gamma_AB, gamma_L and
/// gamma_R are written in meV; everything else in the internal unit.
nlohmann::json params_to_json(const SwitchParams& p);

/// Strict parse: unknown keys are rejected, absent keys keep their defaults.
SwitchParams params_from_json(const nlohmann::json& j);

const char* to_string(MarcusDenominator d);
MarcusDenominator marcus_denominator_from_string(const std::string& s);
const char* to_string(State s);

}  // namespace dms
