#include "tapertpa/lineshape.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "tapertpa/error.hpp"
#include "tapertpa/physical_constants.hpp"

namespace tpa::lineshape {

using phys::kPi;

namespace {

constexpr double kGaussianFwhmPerSigma = 2.3548200450309493;  // 2 sqrt(2 ln 2)
constexpr double kGaussianTruncation = 8.0;                   // sigmas
constexpr int kStepsPerFeature = 20;

}  // namespace

std::string_view to_string(Geometry g) {
  return g == Geometry::kCounter ? "counter" : "co";
}

Geometry parse_geometry(std::string_view text) {
  if (text == "counter") return Geometry::kCounter;
  if (text == "co") return Geometry::kCo;
  throw InputError("unknown geometry '" + std::string(text) + "' (expected counter | co)");
}

double cusp(double delta_angular, double tau0) {
  return std::exp(-std::abs(delta_angular * tau0));
}

double cusp_fwhm(double tau0) {
  if (!(tau0 > 0.0)) throw DomainError("tau0 must be > 0");
  return phys::kLn2 / (kPi * tau0);
}

double off_resonant_depth(double delta, double gamma_intermediate, double strength) {
  if (!(gamma_intermediate > 0.0)) throw DomainError("intermediate linewidth must be > 0");
  const double half = 0.5 * gamma_intermediate;
  return strength / (delta * delta + half * half);
}

double doppler_kernel_sigma(Geometry geometry, double lambda1, double lambda2,
                            double temperature, double mass) {
  if (!(lambda1 > 0.0) || !(lambda2 > 0.0)) throw DomainError("wavelengths must be > 0");
  const double k1 = 2.0 * kPi / lambda1;
  const double k2 = 2.0 * kPi / lambda2;
  const double dk = geometry == Geometry::kCounter ? std::abs(k1 - k2) : k1 + k2;
  return dk * vapor::velocity_sigma(temperature, mass) / (2.0 * kPi);
}

double power_broadening_hwhm(double power, double psat, double gamma0) {
  if (!(psat > 0.0)) throw DomainError("saturation power must be > 0");
  if (!(power >= 0.0)) throw DomainError("power must be >= 0");
  return gamma0 * (std::sqrt(1.0 + power / psat) - 1.0);
}

BroadeningKernel::BroadeningKernel(double lorentzian_hwhm, double gaussian_sigma, double step,
                                   double half_extent)
    : lorentzian_hwhm_(lorentzian_hwhm),
      gaussian_sigma_(gaussian_sigma),
      step_(step),
      half_extent_(half_extent) {
  if (!(step > 0.0)) throw InputError("kernel step must be > 0");
  if (lorentzian_hwhm < 0.0 || gaussian_sigma < 0.0) throw InputError("kernel widths must be >= 0");
  const bool lor = lorentzian_hwhm > 0.0;
  const bool gau = gaussian_sigma > 0.0;
  if (!lor && !gau) {
    weights_ = {1.0};
    return;
  }
  const int jl = lor ? std::max(1, static_cast<int>(std::ceil(half_extent / step))) : 0;
  const int jg = gau ? std::max(1, static_cast<int>(std::ceil(kGaussianTruncation * gaussian_sigma / step))) : 0;
  auto lorentz = [&](int j) {
    const double x = j * step / lorentzian_hwhm;
    return 1.0 / (1.0 + x * x);
  };
  auto gauss = [&](int j) {
    const double x = j * step / gaussian_sigma;
    return std::exp(-0.5 * x * x);
  };
  if (lor && !gau) {
    half_width_ = jl;
    weights_.resize(2 * jl + 1);
    for (int j = -jl; j <= jl; ++j) weights_[j + jl] = lorentz(j);
  } else if (gau && !lor) {
    half_width_ = jg;
    weights_.resize(2 * jg + 1);
    for (int j = -jg; j <= jg; ++j) weights_[j + jg] = gauss(j);
  } else {
    // Direct-sum Voigt on the lattice, truncated to the Lorentzian extent.
    half_width_ = jl;
    std::vector<double> g(2 * jg + 1);
    for (int m = -jg; m <= jg; ++m) g[m + jg] = gauss(m);
    std::vector<double> l(2 * (jl + jg) + 1);
    for (int m = -(jl + jg); m <= jl + jg; ++m) l[m + jl + jg] = lorentz(m);
    weights_.assign(2 * jl + 1, 0.0);
    for (int j = 0; j <= jl; ++j) {
      double acc = 0.0;
      for (int m = -jg; m <= jg; ++m) acc += g[m + jg] * l[j - m + jl + jg];
      weights_[jl + j] = acc;
      weights_[jl - j] = acc;
    }
  }
  double total = 0.0;
  for (double w : weights_) total += w;
  for (double& w : weights_) w /= total;
}

DipProfile::DipProfile(double tau0, const BroadeningKernel& kernel, double max_offset)
    : tau0_(tau0), step_(kernel.step()) {
  if (!(tau0 > 0.0)) throw InputError("tau0 must be > 0");
  decay_ = 2.0 * kPi * tau0 * step_;
  const double q = std::exp(-decay_);
  const int jk = kernel.half_width();
  const int kmax = static_cast<int>(std::ceil(std::abs(max_offset) / step_)) + 2;
  lo_ = -jk;
  const int hi = std::max(kmax, jk) + 1;
  const std::size_t n = static_cast<std::size_t>(hi - lo_ + 1);
  forward_.assign(n, 0.0);
  backward_.assign(n, 0.0);
  auto k_at = [&](int j) { return (j < -jk || j > jk) ? 0.0 : kernel.weight(j); };
  // forward_[k] = sum_{j<=k} K_j q^(k-j); backward_[k] = sum_{j>=k} K_j q^(j-k)
  double acc = 0.0;
  for (int k = lo_; k <= hi; ++k) {
    acc = k_at(k) + q * acc;
    forward_[static_cast<std::size_t>(k - lo_)] = acc;
  }
  acc = 0.0;
  for (int k = hi; k >= lo_; --k) {
    acc = k_at(k) + q * acc;
    backward_[static_cast<std::size_t>(k - lo_)] = acc;
  }
  peak_ = 1.0;
  peak_ = raw(0.0);
}

double DipProfile::raw(double abs_offset) const {
  const double u = abs_offset / step_;
  const double kf = std::floor(u);
  const double frac = u - kf;
  const int k = static_cast<int>(kf);
  const int last = lo_ + static_cast<int>(forward_.size()) - 1;
  if (k + 1 > last) {
    // Beyond the kernel support only the forward sum contributes.
    const double f_last = forward_.back();
    return f_last * std::exp(-decay_ * (u - last)) / peak_;
  }
  const double f = forward_[static_cast<std::size_t>(k - lo_)];
  const double b = backward_[static_cast<std::size_t>(k + 1 - lo_)];
  return (std::exp(-decay_ * frac) * f + std::exp(-decay_ * (1.0 - frac)) * b) / peak_;
}

double DipProfile::operator()(double offset) const { return raw(std::abs(offset)); }

void DipProfile::evaluate(std::span<const double> x, double center, std::span<double> out) const {
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = raw(std::abs(x[i] - center));
}

double DipProfile::fwhm() const {
  // Unimodal and symmetric: bracket the half-maximum on the lattice, then bisect.
  double hi = step_;
  while ((*this)(hi) > 0.5) hi *= 2.0;
  double lo = 0.0;
  for (int it = 0; it < 200 && hi - lo > 1e-12 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    if ((*this)(mid) > 0.5) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return lo + hi;
}

void TwoPhotonModel::validate() const {
  if (!(lambda1 > 0.0) || !(lambda2 > 0.0)) throw InputError("wavelengths must be > 0");
  if (!(power1 >= 0.0) || !(power2 >= 0.0)) throw InputError("powers must be >= 0");
  if (!(reference_power1 > 0.0) || !(reference_power2 > 0.0)) {
    throw InputError("reference powers must be > 0");
  }
  if (!(psat > 0.0)) throw InputError("psat must be > 0");
  if (!(baseline > 0.0 && baseline <= kMaxTransmission)) throw InputError("baseline must lie in (0, 1.2]");
  if (!(transit.tau0 > 0.0)) throw InputError("transit tau0 must be > 0");
  if (!(broadening.intermediate_linewidth > 0.0)) throw InputError("intermediate linewidth must be > 0");
  if (broadening.gamma0 < 0.0) throw InputError("gamma0 must be >= 0");
  if (broadening.doppler && !(broadening.temperature > 0.0 && broadening.mass > 0.0)) {
    throw InputError("Doppler kernel needs temperature > 0 and mass > 0");
  }
  for (const auto& d : dips) {
    if (!(d.strength >= 0.0)) throw InputError("dip strength must be >= 0");
  }
  grid.validate();
}

DipWidths dip_widths(const TwoPhotonModel& model) {
  DipWidths w;
  w.tau0 = model.transit.tau0;
  if (model.broadening.power_broadening) {
    w.lorentzian_hwhm = power_broadening_hwhm(model.power1, model.psat, model.broadening.gamma0);
  }
  if (model.broadening.doppler) {
    w.gaussian_sigma = doppler_kernel_sigma(model.geometry, model.lambda1, model.lambda2,
                                            model.broadening.temperature, model.broadening.mass);
  }
  return w;
}

double required_step(const DipWidths& widths) {
  double narrowest = cusp_fwhm(widths.tau0);
  if (widths.lorentzian_hwhm > 0.0) narrowest = std::min(narrowest, 2.0 * widths.lorentzian_hwhm);
  if (widths.gaussian_sigma > 0.0) {
    narrowest = std::min(narrowest, kGaussianFwhmPerSigma * widths.gaussian_sigma);
  }
  return narrowest / kStepsPerFeature;
}

std::vector<double> dip_depths(const TwoPhotonModel& model) {
  const double gamma = model.broadening.intermediate_linewidth;
  const double half2 = 0.25 * gamma * gamma;
  const double power_scale =
      (model.power1 / model.reference_power1) * (model.power2 / model.reference_power2);
  std::vector<double> out;
  out.reserve(model.dips.size());
  for (const auto& d : model.dips) {
    out.push_back(off_resonant_depth(d.intermediate_detuning_delta, gamma, d.strength) * half2 *
                  power_scale);
  }
  return out;
}

SpectrumData synthesize_two_photon(const TwoPhotonModel& model) {
  model.validate();
  const DipWidths widths = dip_widths(model);
  const double need = required_step(widths);
  if (model.grid.step > need * (1.0 + 1e-12)) {
    std::ostringstream os;
    os << "detuning grid step " << model.grid.step / 1e6 << " MHz is too coarse; need <= "
       << need / 1e6 << " MHz to resolve the narrowest feature";
    throw InputError(os.str());
  }
  const auto depths = dip_depths(model);
  double total_depth = 0.0;
  for (double d : depths) total_depth += d;
  if (total_depth > 1.0) {
    throw InputError("total dip depth " + std::to_string(total_depth) +
                     " exceeds 1 (unphysical transmission)");
  }

  SpectrumData out;
  out.detuning = model.grid.points();
  // Kernel truncation depends only on the grid span, so a fit on the same
  // grid rebuilds the identical profile wherever the dips sit.
  double max_offset = out.detuning.back() - out.detuning.front() + model.grid.step;
  for (const auto& d : model.dips) {
    max_offset = std::max({max_offset, std::abs(out.detuning.front() - d.center_offset),
                           std::abs(out.detuning.back() - d.center_offset)});
  }
  const BroadeningKernel kernel(widths.lorentzian_hwhm, widths.gaussian_sigma, model.grid.step,
                                max_offset);
  const DipProfile profile(widths.tau0, kernel, max_offset);

  const std::size_t n = out.detuning.size();
  std::vector<double> absorbed(n, 0.0);
  std::vector<double> column(n);
  for (std::size_t i = 0; i < model.dips.size(); ++i) {
    profile.evaluate(out.detuning, model.dips[i].center_offset, column);
    for (std::size_t k = 0; k < n; ++k) absorbed[k] += depths[i] * column[k];
  }
  out.transmission.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    out.transmission[k] = std::max(0.0, model.baseline * (1.0 - absorbed[k]));
  }
  out.metadata = {
      {"kind", "two-photon"},
      {"model", to_json(model)},
      {"derived",
       {{"depths", depths},
        {"lorentzian_hwhm_hz", widths.lorentzian_hwhm},
        {"gaussian_sigma_hz", widths.gaussian_sigma},
        {"cusp_fwhm_hz", cusp_fwhm(widths.tau0)},
        {"profile_fwhm_hz", profile.fwhm()},
        {"required_step_hz", need}}},
  };
  return out;
}

SpectrumData synthesize_single_photon(const vapor::VaporConditions& conditions, double probe_power,
                                      double psat, const DetuningGrid& grid,
                                      double reference_line) {
  conditions.validate();
  grid.validate();
  if (!(psat > 0.0)) throw InputError("psat must be > 0");
  if (!(probe_power >= 0.0)) throw InputError("probe power must be >= 0");
  const auto lines = vapor::line_list(conditions, reference_line);
  const double saturation = 1.0 / (1.0 + probe_power / psat);

  SpectrumData out;
  out.detuning = grid.points();
  out.transmission.assign(out.detuning.size(), 0.0);
  nlohmann::json line_meta = nlohmann::json::array();
  std::vector<double> od(out.detuning.size(), 0.0);
  for (const auto& line : lines) {
    const double fwhm =
        vapor::doppler_fwhm(line.absolute_frequency, conditions.temperature, line.mass);
    const double sigma = fwhm / kGaussianFwhmPerSigma;
    for (std::size_t k = 0; k < od.size(); ++k) {
      const double x = (out.detuning[k] - line.offset) / sigma;
      od[k] += line.weight * std::exp(-0.5 * x * x);
    }
    line_meta.push_back({{"isotope", line.isotope},
                         {"ground_f", line.ground_f},
                         {"offset_hz", line.offset},
                         {"optical_depth", line.weight},
                         {"doppler_fwhm_hz", fwhm}});
  }
  for (std::size_t k = 0; k < od.size(); ++k) {
    out.transmission[k] = std::exp(-od[k] * saturation);
  }
  nlohmann::json isotopes = nlohmann::json::array();
  for (const auto& iso : conditions.isotopes) {
    isotopes.push_back({{"name", iso.name},
                        {"mass_kg", iso.mass},
                        {"abundance", iso.abundance},
                        {"ground_hyperfine_splitting_hz", iso.ground_hyperfine_splitting}});
  }
  out.metadata = {
      {"kind", "single-photon"},
      {"temperature_k", conditions.temperature},
      {"optical_depth_scale", conditions.optical_depth_scale},
      {"probe_power_w", probe_power},
      {"psat_w", psat},
      {"reference_line_hz", reference_line},
      {"grid", {{"min_hz", grid.min}, {"max_hz", grid.max}, {"step_hz", grid.step}}},
      {"isotopes", isotopes},
      {"lines", line_meta},
  };
  return out;
}

nlohmann::json to_json(const TwoPhotonModel& model) {
  nlohmann::json dips = nlohmann::json::array();
  for (const auto& d : model.dips) {
    dips.push_back({{"center_offset_hz", d.center_offset},
                    {"intermediate_detuning_hz", d.intermediate_detuning_delta},
                    {"strength", d.strength}});
  }
  return {
      {"lambda1_m", model.lambda1},
      {"lambda2_m", model.lambda2},
      {"geometry", to_string(model.geometry)},
      {"dips", dips},
      {"transit",
       {{"interaction_extent_m", model.transit.interaction_extent_a},
        {"thermal_speed_m_per_s", model.transit.thermal_speed_vth},
        {"tau0_s", model.transit.tau0}}},
      {"power1_w", model.power1},
      {"power2_w", model.power2},
      {"reference_power1_w", model.reference_power1},
      {"reference_power2_w", model.reference_power2},
      {"psat_w", model.psat},
      {"baseline", model.baseline},
      {"grid", {{"min_hz", model.grid.min}, {"max_hz", model.grid.max}, {"step_hz", model.grid.step}}},
      {"broadening",
       {{"doppler", model.broadening.doppler},
        {"temperature_k", model.broadening.temperature},
        {"mass_kg", model.broadening.mass},
        {"power_broadening", model.broadening.power_broadening},
        {"gamma0_hz", model.broadening.gamma0},
        {"intermediate_linewidth_hz", model.broadening.intermediate_linewidth}}},
  };
}

}  // namespace tpa::lineshape
