#pragma once

#include <numbers>

namespace dms::constants {

inline constexpr double boltzmann = 8.6173e-5;            // eV/K
inline constexpr double hbar = 6.5821e-16;                // eV s
inline constexpr double elementary_charge = 1.60217663e-19;  // C
inline constexpr double pi = std::numbers::pi;

/// Rates below this are treated as a vanished contraction (s^-1).
inline constexpr double contraction_guard = 1e-12;

}  // namespace dms::constants
