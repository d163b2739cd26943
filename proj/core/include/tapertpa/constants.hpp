#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "tapertpa/vapor.hpp"
#include "tapertpa/wave_optics.hpp"

namespace tpa {

/// Contents of the versioned atomic/material constants file.
struct AtomicConstants {
  int version = 0;
  std::string source;
  std::vector<vapor::Isotope> isotopes;
  double reference_line = 0.0;           // Hz
  double intermediate_linewidth = 0.0;   // Hz, FWHM of the intermediate state
  double d2_wavelength = 0.0;            // m
  optics::SellmeierModel core_material;
};

inline constexpr int kConstantsVersion = 1;
inline constexpr const char* kConstantsEnvVar = "TAPERTPA_CONSTANTS";

/// Loads and validates a constants file. Throws ConfigError.
AtomicConstants load_constants(const std::filesystem::path& path);

/// $TAPERTPA_CONSTANTS when set, otherwise `fallback`.
std::filesystem::path resolve_constants_path(const std::filesystem::path& fallback);

}  // namespace tpa
