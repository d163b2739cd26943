#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "tapertpa/constants.hpp"
#include "tapertpa/fitting.hpp"
#include "tapertpa/lineshape.hpp"
#include "tapertpa/photon_budget.hpp"
#include "tapertpa/transit_mc.hpp"
#include "tapertpa/vapor.hpp"
#include "tapertpa/wave_optics.hpp"

namespace tpa {

struct ModeSettings {
  double wavelength = 780e-9;
  std::vector<double> sweep_diameters;    // empty: no sweep
  std::vector<double> sweep_wavelengths;  // empty: the mode wavelength
};

struct SinglePhotonSettings {
  double probe_power = 10e-9;
  double psat = 30e-9;
  DetuningGrid grid{-6e9, 6e9, 1e6};
};

struct McSettings {
  std::uint64_t n_trajectories = 100000;
  std::optional<double> decay_length_xi;  // from the mode solver when unset
  std::optional<double> wavelength;       // solver wavelength; defaults to lambda1
  std::optional<double> outer_cutoff;
  std::optional<double> time_step;
  std::optional<DetuningGrid> grid;
  std::optional<double> fixed_speed;
  unsigned threads = 0;
};

struct BudgetSettings {
  double power = 200e-9;
  double wavelength = 780e-9;
  std::optional<double> group_velocity;  // pinned; solver group index when unset
};

/// What the fit holds fixed (or starts from) for broadening widths.
struct FitSettings {
  fit::FitModelSpec spec;
  // When true, fixed widths come from the two-photon model in this config.
  bool widths_from_model = true;
};

struct IoSettings {
  std::filesystem::path output_dir = ".";
  std::string stem;  // output file stem; subcommand name when empty
  std::optional<std::filesystem::path> input;
};

/// A fully resolved run configuration in SI units.
struct RunConfig {
  std::filesystem::path source;  // config file, empty for built-in defaults
  std::filesystem::path constants_path;
  AtomicConstants constants;
  optics::FiberSpec fiber;
  ModeSettings mode;
  vapor::VaporConditions vapor;
  lineshape::TwoPhotonModel two_photon;
  SinglePhotonSettings single_photon;
  McSettings mc;
  BudgetSettings budget;
  FitSettings fit;
  IoSettings io;
  std::uint64_t seed = 1;
};

/// Default shipped constants path: TAPERTPA_DATA_DIR at build time.
std::filesystem::path default_constants_path();

/// Parses a YAML run configuration. Paths inside are relative to the file.
/// The constants path is resolved as: $TAPERTPA_CONSTANTS, then the file's
/// `constants` key, then the default. Throws ConfigError.
RunConfig load_run_config(const std::filesystem::path& path);

/// Defaults with constants loaded (same resolution order, without a file).
RunConfig default_run_config();

/// Builds the MC configuration; xi comes from the HE11 solver when not given.
mc::McConfig make_mc_config(const RunConfig& config);

/// Fit spec with fixed widths filled from the two-photon model when requested.
fit::FitModelSpec make_fit_spec(const RunConfig& config);

nlohmann::json to_json(const RunConfig& config);

}  // namespace tpa
