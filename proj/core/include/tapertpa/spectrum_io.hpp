#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "tapertpa/spectrum.hpp"

namespace tpa::io {

/// Writes `contents` to a sibling temporary file and renames it over `path`.
/// Throws IoError.
void atomic_write(const std::filesystem::path& path, const std::string& contents);

/// CSV text: header `detuning_mhz,transmission`, one row per sample.
std::string format_spectrum_csv(const SpectrumData& data);
void write_spectrum_csv(const std::filesystem::path& path, const SpectrumData& data);

/// Pretty-printed JSON with a trailing newline.
void write_json(const std::filesystem::path& path, const nlohmann::json& value);

struct IngestedSpectrum {
  SpectrumData data;
  std::string filename;
  std::string detuning_column;
  std::string transmission_column;
  std::string detuning_unit;  // "Hz", "kHz", "MHz" or "GHz"
  std::vector<std::string> warnings;
};

/// Reads a two-column CSV. The header names the detuning column
/// `detuning_<unit>` (hz, khz, mhz, ghz) and the transmission column; lines
/// starting with '#' are skipped. Rows are sorted by detuning and duplicate
/// detunings collapse to their mean, each with a warning. Malformed rows throw
/// InputError naming the line number; unreadable files throw IoError.
IngestedSpectrum read_spectrum_csv(const std::filesystem::path& path);

}  // namespace tpa::io
