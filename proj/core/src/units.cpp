#include "tapertpa/units.hpp"

#include <array>
#include <cctype>
#include <charconv>
#include <string>

#include "tapertpa/error.hpp"

namespace tpa::units {

namespace {

struct UnitEntry {
  std::string_view symbol;
  Dimension dimension;
  double scale;
};

constexpr std::array kUnits{
    UnitEntry{"m", Dimension::kLength, 1.0},
    UnitEntry{"cm", Dimension::kLength, 1e-2},
    UnitEntry{"mm", Dimension::kLength, 1e-3},
    UnitEntry{"um", Dimension::kLength, 1e-6},
    UnitEntry{"\xC2\xB5m", Dimension::kLength, 1e-6},
    UnitEntry{"nm", Dimension::kLength, 1e-9},
    UnitEntry{"pm", Dimension::kLength, 1e-12},
    UnitEntry{"Hz", Dimension::kFrequency, 1.0},
    UnitEntry{"kHz", Dimension::kFrequency, 1e3},
    UnitEntry{"MHz", Dimension::kFrequency, 1e6},
    UnitEntry{"GHz", Dimension::kFrequency, 1e9},
    UnitEntry{"THz", Dimension::kFrequency, 1e12},
    UnitEntry{"s", Dimension::kTime, 1.0},
    UnitEntry{"ms", Dimension::kTime, 1e-3},
    UnitEntry{"us", Dimension::kTime, 1e-6},
    UnitEntry{"\xC2\xB5s", Dimension::kTime, 1e-6},
    UnitEntry{"ns", Dimension::kTime, 1e-9},
    UnitEntry{"ps", Dimension::kTime, 1e-12},
    UnitEntry{"fs", Dimension::kTime, 1e-15},
    UnitEntry{"W", Dimension::kPower, 1.0},
    UnitEntry{"mW", Dimension::kPower, 1e-3},
    UnitEntry{"uW", Dimension::kPower, 1e-6},
    UnitEntry{"\xC2\xB5W", Dimension::kPower, 1e-6},
    UnitEntry{"nW", Dimension::kPower, 1e-9},
    UnitEntry{"pW", Dimension::kPower, 1e-12},
    UnitEntry{"K", Dimension::kTemperature, 1.0},
    UnitEntry{"m/s", Dimension::kSpeed, 1.0},
    UnitEntry{"km/s", Dimension::kSpeed, 1e3},
    UnitEntry{"kg", Dimension::kMass, 1.0},
    UnitEntry{"u", Dimension::kMass, 1.66053906660e-27},
};

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

}  // namespace

std::string_view to_string(Dimension d) {
  switch (d) {
    case Dimension::kLength: return "length";
    case Dimension::kFrequency: return "frequency";
    case Dimension::kTime: return "time";
    case Dimension::kPower: return "power";
    case Dimension::kTemperature: return "temperature";
    case Dimension::kSpeed: return "speed";
    case Dimension::kMass: return "mass";
    case Dimension::kDimensionless: return "dimensionless";
  }
  return "?";
}

double parse_quantity(std::string_view text, Dimension expected) {
  const std::string_view s = trim(text);
  double value = 0.0;
  const auto* first = s.data();
  const auto* last = s.data() + s.size();
  if (!s.empty() && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc{}) {
    throw ConfigError("cannot parse a number from '" + std::string(text) + "'");
  }
  const std::string_view unit = trim(std::string_view(ptr, static_cast<std::size_t>(last - ptr)));
  if (unit.empty()) {
    if (expected == Dimension::kDimensionless) return value;
    throw ConfigError("'" + std::string(text) + "' needs an explicit " +
                      std::string(to_string(expected)) + " unit");
  }
  for (const auto& u : kUnits) {
    if (u.symbol == unit) {
      if (u.dimension != expected) {
        throw ConfigError("'" + std::string(text) + "' is a " + std::string(to_string(u.dimension)) +
                          ", expected " + std::string(to_string(expected)));
      }
      return value * u.scale;
    }
  }
  throw ConfigError("unknown unit '" + std::string(unit) + "' in '" + std::string(text) + "'");
}

}  // namespace tpa::units
