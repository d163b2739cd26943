#pragma once

#include <cstddef>
#include <nlohmann/json.hpp>
#include <vector>

namespace tpa {

/// Uniform detuning axis in Hz.
struct DetuningGrid {
  double min = -500e6;
  double max = 500e6;
  double step = 0.1e6;

  void validate() const;
  [[nodiscard]] std::size_t size() const;
  [[nodiscard]] double at(std::size_t i) const { return min + static_cast<double>(i) * step; }
  [[nodiscard]] std::vector<double> points() const;
  /// min == -max and the axis passes through zero exactly.
  [[nodiscard]] bool symmetric() const;
};

struct SpectrumData {
  std::vector<double> detuning;      // Hz, strictly increasing
  std::vector<double> transmission;  // dimensionless
  nlohmann::json metadata = nlohmann::json::object();

  // Equal lengths >= 2, strictly increasing detuning, transmission in [0, 1.2].
  void validate() const;
  [[nodiscard]] std::size_t size() const { return detuning.size(); }
};

inline constexpr double kMaxTransmission = 1.2;

}  // namespace tpa
