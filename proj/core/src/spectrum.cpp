#include "tapertpa/spectrum.hpp"

#include <cmath>
#include <string>

#include "tapertpa/error.hpp"

namespace tpa {

void DetuningGrid::validate() const {
  if (!(step > 0.0)) throw InputError("detuning grid step must be > 0");
  if (!(min < max)) throw InputError("detuning grid needs min < max");
  if (!std::isfinite(min) || !std::isfinite(max)) throw InputError("detuning grid is not finite");
  if ((max - min) / step > 5e6) throw InputError("detuning grid has more than 5e6 points");
}

std::size_t DetuningGrid::size() const {
  // Tolerate rounding in (max - min) / step so that +-500 MHz at 0.1 MHz has 10001 points.
  const double n = (max - min) / step;
  return static_cast<std::size_t>(std::floor(n + 1e-9)) + 1;
}

std::vector<double> DetuningGrid::points() const {
  std::vector<double> out(size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = at(i);
  return out;
}

bool DetuningGrid::symmetric() const {
  if (min != -max) return false;
  const double n = (max - min) / step;
  const double rounded = std::round(n);
  return std::abs(n - rounded) < 1e-9 && static_cast<long long>(rounded) % 2 == 0;
}

void SpectrumData::validate() const {
  if (detuning.size() != transmission.size()) {
    throw InputError("spectrum arrays differ in length");
  }
  if (detuning.size() < 2) throw InputError("spectrum needs at least 2 points");
  for (std::size_t i = 0; i < detuning.size(); ++i) {
    if (!std::isfinite(detuning[i]) || !std::isfinite(transmission[i])) {
      throw InputError("spectrum has a non-finite value at index " + std::to_string(i));
    }
    if (i > 0 && !(detuning[i] > detuning[i - 1])) {
      throw InputError("spectrum detuning is not strictly increasing at index " +
                       std::to_string(i));
    }
    if (transmission[i] < 0.0 || transmission[i] > kMaxTransmission) {
      throw InputError("transmission " + std::to_string(transmission[i]) + " at index " +
                       std::to_string(i) + " is outside [0, 1.2]");
    }
  }
}

}  // namespace tpa
