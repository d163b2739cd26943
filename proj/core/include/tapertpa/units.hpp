#pragma once

#include <string>
#include <string_view>

namespace tpa::units {

enum class Dimension {
  kLength,
  kFrequency,
  kTime,
  kPower,
  kTemperature,
  kSpeed,
  kMass,
  kDimensionless,
};

std::string_view to_string(Dimension d);

/// Parses "350 nm", "2.05ns", "-3.0357 GHz" into SI units and checks the
/// dimension. A bare number is rejected unless the dimension is kDimensionless.
/// Throws ConfigError.
double parse_quantity(std::string_view text, Dimension expected);

inline constexpr double nm = 1e-9;
inline constexpr double um = 1e-6;
inline constexpr double mm = 1e-3;
inline constexpr double ns = 1e-9;
inline constexpr double ps = 1e-12;
inline constexpr double nW = 1e-9;
inline constexpr double MHz = 1e6;
inline constexpr double GHz = 1e9;

}  // namespace tpa::units
