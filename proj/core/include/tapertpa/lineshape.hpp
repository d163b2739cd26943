#pragma once

#include <span>
#include <string_view>
#include <vector>

#include "tapertpa/spectrum.hpp"
#include "tapertpa/vapor.hpp"

namespace tpa::lineshape {

enum class Geometry { kCounter, kCo };

std::string_view to_string(Geometry g);
Geometry parse_geometry(std::string_view text);

/// Transit-time cusp exp(-|delta tau0|); `delta_angular` in rad/s.
double cusp(double delta_angular, double tau0);

/// FWHM of the cusp in ordinary frequency, ln2 / (pi tau0).
double cusp_fwhm(double tau0);

/// strength / (delta^2 + (gamma/2)^2), delta and gamma in Hz.
double off_resonant_depth(double delta, double gamma_intermediate, double strength);

/// Gaussian sigma (Hz) of the two-photon detuning from atomic motion,
/// |k1 -/+ k2| sqrt(kT/m) / 2pi; minus for counter-propagating beams.
double doppler_kernel_sigma(Geometry geometry, double lambda1, double lambda2,
                            double temperature, double mass);

/// Excess Lorentzian half-width gamma0 (sqrt(1 + P/Psat) - 1).
double power_broadening_hwhm(double power, double psat, double gamma0);

/// Lorentzian (half-width) convolved with a Gaussian (sigma), sampled on a
/// symmetric lattice of spacing `step` and normalized to unit sum. A zero
/// width collapses that factor to a delta function.
class BroadeningKernel {
 public:
  BroadeningKernel(double lorentzian_hwhm, double gaussian_sigma, double step,
                   double half_extent);

  [[nodiscard]] bool is_delta() const { return weights_.size() == 1; }
  [[nodiscard]] int half_width() const { return half_width_; }
  [[nodiscard]] double step() const { return step_; }
  [[nodiscard]] double lorentzian_hwhm() const { return lorentzian_hwhm_; }
  [[nodiscard]] double gaussian_sigma() const { return gaussian_sigma_; }
  [[nodiscard]] double half_extent() const { return half_extent_; }
  /// Weight at lattice index j in [-half_width, half_width].
  [[nodiscard]] double weight(int j) const { return weights_[static_cast<std::size_t>(j + half_width_)]; }

 private:
  double lorentzian_hwhm_, gaussian_sigma_, step_, half_extent_;
  int half_width_ = 0;
  std::vector<double> weights_;
};

/// Unit-peak profile cusp (*) kernel, evaluated exactly as the lattice sum
///   P(x) = sum_j K_j exp(-2 pi tau0 |x - j h|)
/// using forward/backward exponential partial sums, so any offset x (Hz) is
/// available without interpolation.
class DipProfile {
 public:
  DipProfile(double tau0, const BroadeningKernel& kernel, double max_offset);

  [[nodiscard]] double operator()(double offset) const;
  /// Writes profile(x_i - center) into `out`.
  void evaluate(std::span<const double> x, double center, std::span<double> out) const;
  [[nodiscard]] double fwhm() const;
  [[nodiscard]] double tau0() const { return tau0_; }

 private:
  double raw(double abs_offset) const;

  double tau0_, step_, decay_;  // decay_ = 2 pi tau0 h
  int lo_ = 0;                   // first lattice index stored
  std::vector<double> forward_, backward_;
  double peak_ = 1.0;
};

struct DipSpec {
  double center_offset = 0.0;                 // Hz, position on the scan axis
  double intermediate_detuning_delta = 0.0;   // Hz
  double strength = 0.0;                      // depth on resonance at reference powers
};

struct BroadeningSettings {
  bool doppler = true;
  double temperature = 373.15;                // K
  double mass = 1.409993199e-25;              // kg
  bool power_broadening = true;
  double gamma0 = 3.0333e6;                   // Hz, Lorentzian base half-width
  double intermediate_linewidth = 6.0666e6;   // Hz, FWHM entering the 1/delta^2 law
};

struct TwoPhotonModel {
  double lambda1 = 780.241e-9;
  double lambda2 = 776.0e-9;
  Geometry geometry = Geometry::kCounter;
  std::vector<DipSpec> dips;
  vapor::TransitModel transit;
  double power1 = 146e-9;
  double power2 = 29e-9;
  double reference_power1 = 146e-9;
  double reference_power2 = 29e-9;
  double psat = 30e-9;
  double baseline = 1.0;
  DetuningGrid grid;
  BroadeningSettings broadening;

  void validate() const;
};

/// Widths composing each dip for a model, Hz (Lorentzian as half-width).
struct DipWidths {
  double tau0 = 0.0;
  double lorentzian_hwhm = 0.0;
  double gaussian_sigma = 0.0;
};
DipWidths dip_widths(const TwoPhotonModel& model);

/// Largest grid step resolving every non-zero feature to FWHM/20.
double required_step(const DipWidths& widths);

/// Relative depth of each dip: strength x (1/delta^2 law normalized to 1 on
/// resonance) x (P1 P2)/(P1ref P2ref).
std::vector<double> dip_depths(const TwoPhotonModel& model);

/// baseline (1 - sum_i depth_i L(x - center_i)), clamped at 0.
SpectrumData synthesize_two_photon(const TwoPhotonModel& model);

/// exp(-sum_j OD_j G_j / (1 + P/Psat)) over the D2 ground hyperfine lines.
SpectrumData synthesize_single_photon(const vapor::VaporConditions& conditions,
                                      double probe_power, double psat,
                                      const DetuningGrid& grid, double reference_line);

nlohmann::json to_json(const TwoPhotonModel& model);

}  // namespace tpa::lineshape
