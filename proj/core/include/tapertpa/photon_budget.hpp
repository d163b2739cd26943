#pragma once

#include <string>

#include <nlohmann/json.hpp>

#include "tapertpa/wave_optics.hpp"

namespace tpa::budget {

struct BudgetInput {
  double total_power = 200e-9;        // W
  double waist_length = 5e-3;         // m
  double group_velocity = 2.062e8;    // m/s
  double photon_wavelength = 780e-9;  // m

  /// Input with v_g = c / group_index.
  static BudgetInput from_group_index(double power, double length, double group_index,
                                      double wavelength);
};

struct BudgetResult {
  double transit_time = 0.0;   // s
  double energy = 0.0;         // J
  double photon_number = 0.0;
  double group_velocity = 0.0; // m/s actually used
  double group_index = 0.0;    // c / v_g
  std::string group_index_source = "pinned";  // "pinned" or "solver"
};

/// transit = L/v_g, energy = P L / v_g, photons = energy lambda / (h c).
/// Throws DomainError for v_g >= c or non-positive length, speed, wavelength,
/// and for negative power.
BudgetResult estimate_budget(const BudgetInput& input);

/// v_g from the solver's group index at `wavelength`; solver errors propagate.
BudgetResult budget_from_mode(double power, const optics::FiberSpec& spec, double wavelength);

nlohmann::json to_json(const BudgetResult& result);

}  // namespace tpa::budget
