#include "tapertpa/vapor.hpp"

#include <algorithm>
#include <cmath>

#include "tapertpa/error.hpp"
#include "tapertpa/physical_constants.hpp"

namespace tpa::vapor {

using phys::kBoltzmann;

void Isotope::validate() const {
  if (!(mass > 0.0)) throw InputError("isotope " + name + ": mass must be > 0");
  if (!(abundance >= 0.0 && abundance <= 1.0)) {
    throw InputError("isotope " + name + ": abundance must lie in [0, 1]");
  }
  if (!(ground_hyperfine_splitting > 0.0)) {
    throw InputError("isotope " + name + ": hyperfine splitting must be > 0");
  }
  if (!(nuclear_spin >= 0.5)) throw InputError("isotope " + name + ": nuclear spin must be >= 1/2");
}

std::string_view to_string(SpeedConvention c) {
  switch (c) {
    case SpeedConvention::kMostProbable: return "most_probable";
    case SpeedConvention::kMean: return "mean";
    case SpeedConvention::kRms: return "rms";
  }
  return "most_probable";
}

SpeedConvention parse_speed_convention(std::string_view text) {
  if (text == "most_probable") return SpeedConvention::kMostProbable;
  if (text == "mean") return SpeedConvention::kMean;
  if (text == "rms") return SpeedConvention::kRms;
  throw InputError("unknown speed convention '" + std::string(text) +
                   "' (expected most_probable | mean | rms)");
}

void VaporConditions::validate() const {
  if (!(temperature > 0.0)) throw InputError("vapor temperature must be > 0");
  if (isotopes.empty()) throw InputError("vapor has no isotopes");
  double total = 0.0;
  for (const auto& iso : isotopes) {
    iso.validate();
    total += iso.abundance;
  }
  if (std::abs(total - 1.0) > 1e-9) {
    throw InputError("isotope abundances sum to " + std::to_string(total) + ", expected 1");
  }
  if (!(optical_depth_scale >= 0.0)) throw InputError("optical_depth_scale must be >= 0");
}

const Isotope& VaporConditions::isotope(std::string_view name) const {
  for (const auto& iso : isotopes) {
    if (iso.name == name) return iso;
  }
  throw InputError("unknown isotope '" + std::string(name) + "'");
}

TransitModel TransitModel::from_extent(double a, double vth) {
  return {a, vth, transit_time(a, vth)};
}

TransitModel TransitModel::from_tau0(double tau0, double vth) {
  if (!(tau0 > 0.0)) throw DomainError("tau0 must be > 0");
  if (!(vth > 0.0)) throw DomainError("thermal speed must be > 0");
  return {tau0 * vth, vth, tau0};
}

double thermal_speed(double temperature, double mass, SpeedConvention convention) {
  if (!(temperature >= 0.0)) throw DomainError("temperature must be >= 0");
  if (!(mass > 0.0)) throw DomainError("mass must be > 0");
  const double kt_m = kBoltzmann * temperature / mass;
  switch (convention) {
    case SpeedConvention::kMostProbable: return std::sqrt(2.0 * kt_m);
    case SpeedConvention::kMean: return std::sqrt(8.0 * kt_m / phys::kPi);
    case SpeedConvention::kRms: return std::sqrt(3.0 * kt_m);
  }
  return std::sqrt(2.0 * kt_m);
}

double velocity_sigma(double temperature, double mass) {
  if (!(temperature >= 0.0)) throw DomainError("temperature must be >= 0");
  if (!(mass > 0.0)) throw DomainError("mass must be > 0");
  return std::sqrt(kBoltzmann * temperature / mass);
}

double doppler_fwhm(double center_frequency, double temperature, double mass) {
  if (!(center_frequency > 0.0)) throw DomainError("center frequency must be > 0");
  if (!(temperature >= 0.0)) throw DomainError("temperature must be >= 0");
  if (!(mass > 0.0)) throw DomainError("mass must be > 0");
  const double c = phys::kSpeedOfLight;
  return center_frequency * std::sqrt(8.0 * kBoltzmann * temperature * phys::kLn2 / (mass * c * c));
}

double transit_time(double a, double vth) {
  if (!(a >= 0.0)) throw DomainError("interaction extent must be >= 0");
  if (!(vth > 0.0)) throw DomainError("thermal speed must be > 0");
  return a / vth;
}

std::vector<Line> line_list(const VaporConditions& conditions, double reference_line) {
  if (conditions.isotopes.empty()) throw InputError("line list requested for an empty isotope list");
  std::vector<Line> lines;
  for (const auto& iso : conditions.isotopes) {
    iso.validate();
    // Ground levels F = I - 1/2 and I + 1/2 about the degeneracy-weighted
    // centroid; a transition from a higher ground level sits lower in frequency.
    const double f_low = iso.nuclear_spin - 0.5;
    const double f_high = iso.nuclear_spin + 0.5;
    const double g_low = 2.0 * f_low + 1.0;
    const double g_high = 2.0 * f_high + 1.0;
    const double g_total = g_low + g_high;
    const double s = iso.ground_hyperfine_splitting;
    const struct {
      double f, g, energy;
    } levels[] = {{f_low, g_low, -s * g_high / g_total}, {f_high, g_high, s * g_low / g_total}};
    for (const auto& lv : levels) {
      Line line;
      line.isotope = iso.name;
      line.ground_f = lv.f;
      line.absolute_frequency = iso.d2_centroid_frequency - lv.energy;
      line.offset = line.absolute_frequency - reference_line;
      line.weight = conditions.optical_depth_scale * iso.abundance * lv.g / g_total;
      line.mass = iso.mass;
      lines.push_back(line);
    }
  }
  std::stable_sort(lines.begin(), lines.end(),
                   [](const Line& a, const Line& b) { return a.offset < b.offset; });
  return lines;
}

}  // namespace tpa::vapor
