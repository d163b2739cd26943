#pragma once

// CODATA 2018 exact / recommended values, SI units.
namespace tpa::phys {

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kSpeedOfLight = 299792458.0;       // m/s
inline constexpr double kPlanck = 6.62607015e-34;          // J s
inline constexpr double kBoltzmann = 1.380649e-23;         // J/K
inline constexpr double kVacuumPermeability = 1.25663706212e-6;  // N/A^2
inline constexpr double kVacuumPermittivity = 8.8541878128e-12;  // F/m
inline constexpr double kLn2 = 0.69314718055994530942;

}  // namespace tpa::phys
