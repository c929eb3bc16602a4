#pragma once

#include <numbers>

namespace hetprobe::constants {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kBoltzmann = 1.380649e-23;    // J/K
inline constexpr double kPlanck = 6.62607015e-34;     // J s
inline constexpr double kSpeedOfLight = 299792458.0;  // m/s

// 87Rb D2 line, F=2 -> F'=3
inline constexpr double kRb87Mass = 1.443160648e-25;          // kg
inline constexpr double kRbD2Wavelength = 780.241209686e-9;   // m (vacuum)
inline constexpr double kRbD2NaturalLinewidth = 6.0666e6;     // Gamma/2pi, Hz
inline constexpr double kRbD2SaturationIntensity = 16.6933;   // W/m^2, cycling transition
inline constexpr double kBohrMagnetonOverH = 13.996245e9;     // Hz/T
inline constexpr double kLandeGroundF2 = 0.5;
inline constexpr double kLandeExcitedF3 = 2.0 / 3.0;

inline constexpr int kGroundF = 2;
inline constexpr int kExcitedF = 3;

} // namespace hetprobe::constants
