#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace tpa::vapor {

struct Isotope {
  std::string name;
  double mass = 0.0;                        // kg
  double abundance = 0.0;                   // fraction
  double ground_hyperfine_splitting = 0.0;  // Hz
  double nuclear_spin = 0.0;                // I; ground levels F = I +/- 1/2
  double d2_centroid_frequency = 0.0;       // Hz, hyperfine-free line center

  void validate() const;
};

enum class SpeedConvention { kMostProbable, kMean, kRms };

std::string_view to_string(SpeedConvention c);
SpeedConvention parse_speed_convention(std::string_view text);

struct VaporConditions {
  double temperature = 373.15;  // K
  std::vector<Isotope> isotopes;
  double optical_depth_scale = 1.0;
  SpeedConvention speed_convention = SpeedConvention::kMostProbable;

  // Temperature > 0, every isotope valid, abundances summing to 1 +/- 1e-9.
  void validate() const;
  [[nodiscard]] const Isotope& isotope(std::string_view name) const;
};

/// tau0 = interaction_extent / thermal_speed.
struct TransitModel {
  double interaction_extent_a = 0.0;  // m
  double thermal_speed_vth = 0.0;     // m/s
  double tau0 = 0.0;                  // s

  static TransitModel from_extent(double a, double vth);
  /// Model with a prescribed tau0 (e.g. a fitted value); a is back-filled.
  static TransitModel from_tau0(double tau0, double vth);
};

/// sqrt(2kT/m) for kMostProbable, sqrt(8kT/(pi m)) for kMean, sqrt(3kT/m) for kRms.
double thermal_speed(double temperature, double mass,
                     SpeedConvention convention = SpeedConvention::kMostProbable);

/// One-dimensional velocity spread sqrt(kT/m).
double velocity_sigma(double temperature, double mass);

/// Doppler FWHM nu0 sqrt(8 kT ln2 / (m c^2)).
double doppler_fwhm(double center_frequency, double temperature, double mass);

double transit_time(double a, double vth);

struct Line {
  std::string isotope;
  double ground_f = 0.0;
  double offset = 0.0;               // Hz relative to the reference line
  double weight = 0.0;               // includes optical_depth_scale
  double absolute_frequency = 0.0;   // Hz
  double mass = 0.0;                 // kg, for the Doppler width
};

/// Ground-state hyperfine components of the D2 line, sorted by offset.
std::vector<Line> line_list(const VaporConditions& conditions, double reference_line);

}  // namespace tpa::vapor
