#include "tapertpa/photon_budget.hpp"

#include <cmath>

#include "tapertpa/error.hpp"
#include "tapertpa/physical_constants.hpp"

namespace tpa::budget {

BudgetInput BudgetInput::from_group_index(double power, double length, double group_index,
                                          double wavelength) {
  if (!(group_index > 0.0)) throw DomainError("group index must be > 0");
  return {power, length, phys::kSpeedOfLight / group_index, wavelength};
}

BudgetResult estimate_budget(const BudgetInput& in) {
  if (!(in.total_power >= 0.0) || !std::isfinite(in.total_power)) {
    throw DomainError("total power must be finite and >= 0");
  }
  if (!(in.waist_length > 0.0)) throw DomainError("waist length must be > 0");
  if (!(in.photon_wavelength > 0.0)) throw DomainError("photon wavelength must be > 0");
  if (!(in.group_velocity > 0.0)) throw DomainError("group velocity must be > 0");
  if (in.group_velocity >= phys::kSpeedOfLight) {
    throw DomainError("group velocity " + std::to_string(in.group_velocity) +
                      " m/s is not below the speed of light");
  }
  BudgetResult r;
  r.group_velocity = in.group_velocity;
  r.group_index = phys::kSpeedOfLight / in.group_velocity;
  r.transit_time = in.waist_length / in.group_velocity;
  r.energy = in.total_power * r.transit_time;
  r.photon_number = r.energy * in.photon_wavelength / (phys::kPlanck * phys::kSpeedOfLight);
  return r;
}

BudgetResult budget_from_mode(double power, const optics::FiberSpec& spec, double wavelength) {
  const double ng = optics::group_index(spec, wavelength);
  auto r = estimate_budget(BudgetInput::from_group_index(power, spec.length, ng, wavelength));
  r.group_index_source = "solver";
  return r;
}

nlohmann::json to_json(const BudgetResult& r) {
  return {{"transit_time_s", r.transit_time},
          {"energy_j", r.energy},
          {"photon_number", r.photon_number},
          {"group_velocity_m_per_s", r.group_velocity},
          {"group_index", r.group_index},
          {"group_index_source", r.group_index_source}};
}

}  // namespace tpa::budget
