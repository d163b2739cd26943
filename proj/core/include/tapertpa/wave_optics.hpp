#pragma once

#include <span>
#include <string>
#include <vector>

namespace tpa::optics {

struct SellmeierTerm {
  double strength = 0.0;    // B_i, dimensionless
  double resonance = 0.0;   // C_i, um^2
};

/// n^2(lambda) = 1 + sum_i B_i lambda^2 / (lambda^2 - C_i), lambda in um.
class SellmeierModel {
 public:
  SellmeierModel() = default;
  SellmeierModel(std::string name, std::vector<SellmeierTerm> terms,
                 double min_wavelength = 0.2e-6, double max_wavelength = 2.0e-6);

  /// Single-term model with a wavelength-independent index.
  static SellmeierModel constant(double index);

  /// Refractive index at `wavelength` (m). Throws DomainError outside the
  /// validity window or at a resonance pole.
  [[nodiscard]] double index(double wavelength) const;
  /// Analytic bulk group index n - lambda dn/dlambda.
  [[nodiscard]] double group_index(double wavelength) const;

  [[nodiscard]] const std::string& name() const { return name_; }
  [[nodiscard]] std::span<const SellmeierTerm> terms() const { return terms_; }
  [[nodiscard]] double min_wavelength() const { return min_wavelength_; }
  [[nodiscard]] double max_wavelength() const { return max_wavelength_; }

 private:
  double index_squared(double wavelength) const;

  std::string name_;
  std::vector<SellmeierTerm> terms_;
  double min_wavelength_ = 0.2e-6;
  double max_wavelength_ = 2.0e-6;
};

struct FiberSpec {
  double diameter = 350e-9;  // m
  double length = 5e-3;      // m
  SellmeierModel core_index_model;
  double cladding_index = 1.0;

  // Throws InputError on a non-positive geometry or a core model that is not
  // silica-like (index outside (1.40, 1.50) on 0.7-0.8 um).
  void validate() const;
  [[nodiscard]] double radius() const { return 0.5 * diameter; }
};

struct ModeSolution {
  double wavelength = 0.0;
  double core_index = 0.0;
  double cladding_index = 1.0;
  double v_number = 0.0;
  double n_eff = 0.0;
  double beta = 0.0;                  // rad/m
  double decay_length_xi = 0.0;       // m
  double evanescent_fraction_eta = 0.0;
  double group_index_ng = 0.0;
  double dispersion_residual = 0.0;   // normalized |F| at the root
  double quadrature_error = 0.0;      // relative error estimate for eta
  int guided_roots = 0;               // nu = 1 roots found by the sign scan
  bool multimode = false;             // V above the TE01/TM01 cutoff
};

inline constexpr double kSingleModeCutoff = 2.404825557695773;
inline constexpr double kGroupIndexStep = 0.1e-9;
inline constexpr int kScanPoints = 4000;

double core_index(const FiberSpec& spec, double wavelength);
double v_number(const FiberSpec& spec, double wavelength);

/// Pole-free form of the nu = 1 hybrid-mode characteristic equation,
///   (J + K)(J + (n2/n1)^2 K) - (n_eff/n1)^2 (1/U^2 + 1/W^2)^2 = 0
/// multiplied through by (U J1(U))^2. `scale` receives the sum of the
/// magnitudes of the two sides so callers can normalize.
double he11_characteristic(double n_eff, double wavenumber, double radius,
                           double n1, double n2, double* scale = nullptr);

/// Fundamental HE11 solution including eta and the group index.
/// Throws NoGuidedModeError when the scan brackets no root.
ModeSolution solve_he11(const FiberSpec& spec, double wavelength);

/// n_g = n_eff - lambda dn_eff/dlambda, central difference with step `dlambda`.
double group_index(const FiberSpec& spec, double wavelength,
                   double dlambda = kGroupIndexStep);

/// Exact HE11 fields for one polarization (Ez ~ cos phi, Hz ~ sin phi),
/// normalized to Ez(a) = 1. Field components are the radial factors; the
/// common factor i multiplying the transverse components is dropped.
class He11Fields {
 public:
  He11Fields(const FiberSpec& spec, double wavelength, double n_eff);

  struct Radial {
    double e_r, e_phi, e_z;  // multiply by cos, sin, cos phi
    double h_r, h_phi, h_z;  // multiply by sin, cos, sin phi
  };
  [[nodiscard]] Radial at(double r) const;
  /// Azimuthally integrated longitudinal Poynting flux density, r * <S_z>.
  [[nodiscard]] double flux_density(double r) const;
  /// Core and cladding power with quadrature error estimates.
  struct PowerSplit {
    double core, cladding, error;
  };
  [[nodiscard]] PowerSplit power_split() const;

  [[nodiscard]] double radius() const { return radius_; }
  [[nodiscard]] double u() const { return u_; }
  [[nodiscard]] double w() const { return w_; }
  [[nodiscard]] double beta() const { return beta_; }
  [[nodiscard]] double omega() const { return omega_; }

 private:
  double radius_, n1_, n2_, beta_, omega_, u_, w_, h_, q_, hz_ratio_;
};

/// Dispersion sweep row (CSV columns diameter_nm, wavelength_nm, n_eff, n_g,
/// eta, xi_nm).
struct SweepRow {
  double diameter;
  double wavelength;
  ModeSolution mode;
};
std::vector<SweepRow> dispersion_sweep(const FiberSpec& base,
                                       std::span<const double> diameters,
                                       std::span<const double> wavelengths);

}  // namespace tpa::optics
