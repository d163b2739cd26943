#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tapertpa/spectrum.hpp"

namespace tpa::fit {

struct Bounds {
  double lo = 0.0;
  double hi = 0.0;
};

/// Model parameters. `depths` are absolute dip amplitudes in transmission
/// units: T(x) = baseline - sum_i depths[i] L(x - centers[i]).
struct FitParameters {
  double baseline = 1.0;
  std::vector<double> centers;      // Hz
  std::vector<double> depths;
  double tau0 = 2e-9;               // s
  double lorentzian_width = 0.0;    // Hz, half-width
  double gaussian_sigma = 0.0;      // Hz
};

/// Width values used to hold (or start) the broadening kernel without a full
/// initial guess; they take precedence over the guess's widths.
struct FixedWidths {
  double lorentzian_width = 0.0;  // Hz, half-width
  double gaussian_sigma = 0.0;    // Hz
};

/// Bound keys: "baseline", "center<i>", "depth<i>", "tau0",
/// "lorentzian_width", "gaussian_sigma". Widths not flagged for fitting are
/// held at the initial_guess value (0 without a guess).
struct FitModelSpec {
  int n_dips = 1;
  bool fit_tau0 = true;
  bool fit_lorentzian_width = false;
  bool fit_gaussian_sigma = false;
  std::map<std::string, Bounds> bounds;
  std::optional<FitParameters> initial_guess;
  std::optional<FixedWidths> fixed_widths;
  int max_evaluations = 2000;
  double tolerance = 1e-10;

  void validate() const;
};

struct FitResult {
  FitParameters parameters;
  std::vector<std::string> names;    // free parameters, covariance order
  std::vector<double> values;
  std::vector<double> uncertainties;
  std::vector<std::vector<double>> covariance_estimate;
  double objective = 0.0;            // sum of squared residuals
  double rms_residual = 0.0;
  double fwhm_hz = 0.0;              // model FWHM when converged, raw data otherwise
  double model_fwhm_hz = 0.0;
  std::optional<double> data_fwhm_hz;
  bool converged = false;
  int n_evaluations = 0;
  std::vector<double> objective_log;  // best objective after each simplex iteration
  std::vector<std::string> warnings;
  std::vector<double> detuning;       // grid the fit was made on
  std::vector<double> model;          // fitted curve on that grid
};

/// Grid-seeded simplex fit of broadened-cusp dips. Throws InputError on
/// invalid or non-finite data.
FitResult fit_cusp(const SpectrumData& data, const FitModelSpec& spec);

/// Evaluates the dip model on `detuning` (same profile construction the
/// fitter uses).
std::vector<double> evaluate_model(const std::vector<double>& detuning,
                                   const FitParameters& parameters);

/// Width between the half-depth crossings around the global minimum, with
/// linear interpolation. Baseline defaults to max(first, last).
double fwhm_numeric(const SpectrumData& data, std::optional<double> baseline = std::nullopt);

struct ResidualReport {
  std::vector<double> residuals;  // data - model
  double rms = 0.0;
  double max_abs = 0.0;
  int runs = 0;
  double runs_z = 0.0;            // Wald-Wolfowitz statistic on residual signs
  std::optional<double> data_fwhm_hz;
  double model_fwhm_hz = 0.0;
};

ResidualReport residual_report(const SpectrumData& data, const FitResult& result);

nlohmann::json to_json(const FitResult& result);

/// Unit of a parameter name for reports ("Hz", "s", "").
std::string parameter_unit(const std::string& name);

}  // namespace tpa::fit
