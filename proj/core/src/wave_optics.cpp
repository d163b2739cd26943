#include "tapertpa/wave_optics.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <limits>
#include <sstream>
#include <utility>

#include "tapertpa/error.hpp"
#include "tapertpa/physical_constants.hpp"

namespace tpa::optics {

namespace {

constexpr double kRootTolerance = 1e-12;
constexpr double kQuadratureTolerance = 1e-8;

// Cladding integration stops where K1(q r)^2 has decayed by e^-60.
constexpr double kCladdingDecayWidths = 30.0;

double j1_prime(double x) { return std::cyl_bessel_j(0.0, x) - std::cyl_bessel_j(1.0, x) / x; }
double k1_prime(double x) { return -std::cyl_bessel_k(0.0, x) - std::cyl_bessel_k(1.0, x) / x; }

std::string format_nm(double wavelength) {
  std::ostringstream os;
  os.precision(6);
  os << wavelength * 1e9 << " nm";
  return os.str();
}

}  // namespace

SellmeierModel::SellmeierModel(std::string name, std::vector<SellmeierTerm> terms,
                               double min_wavelength, double max_wavelength)
    : name_(std::move(name)),
      terms_(std::move(terms)),
      min_wavelength_(min_wavelength),
      max_wavelength_(max_wavelength) {}

SellmeierModel SellmeierModel::constant(double index) {
  return SellmeierModel("constant", {{index * index - 1.0, 0.0}});
}

double SellmeierModel::index_squared(double wavelength) const {
  if (!(wavelength > min_wavelength_ && wavelength < max_wavelength_)) {
    throw DomainError("Sellmeier model '" + name_ + "' is valid on (" +
                      format_nm(min_wavelength_) + ", " + format_nm(max_wavelength_) +
                      "); got " + format_nm(wavelength));
  }
  const double l2 = (wavelength * 1e6) * (wavelength * 1e6);
  double n2 = 1.0;
  for (const auto& t : terms_) {
    const double denom = l2 - t.resonance;
    if (std::abs(denom) < 1e-9 * std::max(l2, 1.0)) {
      throw DomainError("wavelength " + format_nm(wavelength) +
                        " sits on a Sellmeier resonance pole");
    }
    n2 += t.strength * l2 / denom;
  }
  if (!(n2 > 0.0) || !std::isfinite(n2)) {
    throw DomainError("Sellmeier model gives n^2 <= 0 at " + format_nm(wavelength));
  }
  return n2;
}

double SellmeierModel::index(double wavelength) const {
  return std::sqrt(index_squared(wavelength));
}

double SellmeierModel::group_index(double wavelength) const {
  const double n = index(wavelength);
  const double lum = wavelength * 1e6;
  const double l2 = lum * lum;
  // d(n^2)/d(lambda) in 1/um
  double dn2 = 0.0;
  for (const auto& t : terms_) {
    const double denom = l2 - t.resonance;
    dn2 += -2.0 * t.strength * t.resonance * lum / (denom * denom);
  }
  const double dn = dn2 / (2.0 * n);
  return n - lum * dn;
}

void FiberSpec::validate() const {
  if (!(diameter > 0.0)) throw InputError("fiber diameter must be > 0");
  if (!(length > 0.0)) throw InputError("fiber length must be > 0");
  if (!(cladding_index >= 1.0)) throw InputError("cladding index must be >= 1");
  for (double lam : {0.7e-6, 0.75e-6, 0.8e-6}) {
    const double n = core_index_model.index(lam);
    if (!(n > 1.40 && n < 1.50)) {
      throw InputError("core index " + std::to_string(n) + " at " + format_nm(lam) +
                       " is outside (1.40, 1.50)");
    }
  }
}

double core_index(const FiberSpec& spec, double wavelength) {
  return spec.core_index_model.index(wavelength);
}

double v_number(const FiberSpec& spec, double wavelength) {
  const double n1 = core_index(spec, wavelength);
  const double n2 = spec.cladding_index;
  return 2.0 * phys::kPi / wavelength * spec.radius() * std::sqrt(n1 * n1 - n2 * n2);
}

double he11_characteristic(double n_eff, double wavenumber, double radius, double n1,
                           double n2, double* scale) {
  const double ka = wavenumber * radius;
  const double u = ka * std::sqrt(n1 * n1 - n_eff * n_eff);
  const double w = ka * std::sqrt(n_eff * n_eff - n2 * n2);
  const double j1 = std::cyl_bessel_j(1.0, u);
  const double j1p = j1_prime(u);
  const double kt = k1_prime(w) / (w * std::cyl_bessel_k(1.0, w));
  const double ratio = (n2 / n1) * (n2 / n1);
  const double uj = u * j1;
  const double lhs = (j1p + uj * kt) * (j1p + uj * ratio * kt);
  const double inv = 1.0 / (u * u) + 1.0 / (w * w);
  const double rhs = (n_eff / n1) * (n_eff / n1) * inv * inv * uj * uj;
  if (scale != nullptr) *scale = std::abs(lhs) + std::abs(rhs);
  return lhs - rhs;
}

namespace {

struct RootScan {
  std::vector<double> roots;  // ascending n_eff
  std::vector<double> residuals;
};

RootScan scan_roots(double k0, double radius, double n1, double n2) {
  RootScan out;
  auto f = [&](double n) { return he11_characteristic(n, k0, radius, n1, n2); };
  const double width = n1 - n2;
  double prev_n = n2 + width / (kScanPoints + 1);
  double prev_f = f(prev_n);
  for (int i = 2; i <= kScanPoints; ++i) {
    const double n = n2 + width * i / (kScanPoints + 1);
    const double fn = f(n);
    if ((prev_f < 0.0) != (fn < 0.0)) {
      double lo = prev_n, hi = n;
      double flo = prev_f;
      while (hi - lo > kRootTolerance * lo) {
        const double mid = 0.5 * (lo + hi);
        const double fm = f(mid);
        if ((fm < 0.0) == (flo < 0.0)) {
          lo = mid;
          flo = fm;
        } else {
          hi = mid;
        }
      }
      const double root = 0.5 * (lo + hi);
      double scale = 0.0;
      const double r = he11_characteristic(root, k0, radius, n1, n2, &scale);
      out.roots.push_back(root);
      out.residuals.push_back(scale > 0.0 ? std::abs(r) / scale : std::abs(r));
    }
    prev_n = n;
    prev_f = fn;
  }
  return out;
}

struct CoreSolution {
  double n1, n_eff, residual;
  int roots;
};

CoreSolution solve_root(const FiberSpec& spec, double wavelength) {
  const double n1 = core_index(spec, wavelength);
  const double n2 = spec.cladding_index;
  const double k0 = 2.0 * phys::kPi / wavelength;
  const auto scan = scan_roots(k0, spec.radius(), n1, n2);
  if (scan.roots.empty()) {
    std::ostringstream os;
    os << "no guided HE11 mode: dispersion relation has no bracketed root in (" << n2
       << ", " << n1 << ") for d = " << spec.diameter * 1e9 << " nm at "
       << format_nm(wavelength);
    throw NoGuidedModeError(os.str());
  }
  return {n1, scan.roots.back(), scan.residuals.back(), static_cast<int>(scan.roots.size())};
}

}  // namespace

He11Fields::He11Fields(const FiberSpec& spec, double wavelength, double n_eff)
    : radius_(spec.radius()),
      n1_(core_index(spec, wavelength)),
      n2_(spec.cladding_index) {
  const double k0 = 2.0 * phys::kPi / wavelength;
  beta_ = n_eff * k0;
  omega_ = phys::kSpeedOfLight * k0;
  u_ = radius_ * k0 * std::sqrt(n1_ * n1_ - n_eff * n_eff);
  w_ = radius_ * k0 * std::sqrt(n_eff * n_eff - n2_ * n2_);
  h_ = u_ / radius_;
  q_ = w_ / radius_;
  const double jt = j1_prime(u_) / (u_ * std::cyl_bessel_j(1.0, u_));
  const double kt = k1_prime(w_) / (w_ * std::cyl_bessel_k(1.0, w_));
  const double inv = 1.0 / (u_ * u_) + 1.0 / (w_ * w_);
  // Hz amplitude relative to Ez from continuity of E_phi at r = a.
  hz_ratio_ = -(beta_ / (omega_ * phys::kVacuumPermeability)) * inv / (jt + kt);
}

He11Fields::Radial He11Fields::at(double r) const {
  const bool core = r < radius_;
  double f, fp, kappa2, n;
  if (core) {
    const double j1a = std::cyl_bessel_j(1.0, u_);
    f = std::cyl_bessel_j(1.0, h_ * r) / j1a;
    fp = h_ * j1_prime(h_ * r) / j1a;
    kappa2 = h_ * h_;
    n = n1_;
  } else {
    const double k1a = std::cyl_bessel_k(1.0, w_);
    f = std::cyl_bessel_k(1.0, q_ * r) / k1a;
    fp = q_ * k1_prime(q_ * r) / k1a;
    kappa2 = -q_ * q_;
    n = n2_;
  }
  const double wmu = omega_ * phys::kVacuumPermeability;
  const double weps = omega_ * phys::kVacuumPermittivity * n * n;
  const double b = hz_ratio_;
  Radial out{};
  out.e_z = f;
  out.h_z = b * f;
  out.e_r = (beta_ * fp + wmu * b * f / r) / kappa2;
  out.e_phi = (-(beta_ / r) * f - wmu * b * fp) / kappa2;
  out.h_r = (beta_ * b * fp + weps * f / r) / kappa2;
  out.h_phi = ((beta_ / r) * b * f + weps * fp) / kappa2;
  return out;
}

double He11Fields::flux_density(double r) const {
  // <S_z> = 1/2 (E_r H_phi cos^2 - E_phi H_r sin^2); the phi integral of
  // cos^2 and sin^2 is pi each.
  const auto fld = at(r);
  return 0.5 * phys::kPi * r * (fld.e_r * fld.h_phi - fld.e_phi * fld.h_r);
}

He11Fields::PowerSplit He11Fields::power_split() const {
  using boost::math::quadrature::gauss_kronrod;
  // Integrate in x = r/a over unit-width panels. Boost reports each leaf's
  // error on its reference interval [-1, 1], which over-states the error for
  // panels no wider than 2, so the sum below is a conservative estimate.
  auto integrand = [this](double x) { return radius_ * flux_density(radius_ * x); };
  auto panels = [&](double lo, double hi, double& err) {
    double sum = 0.0;
    err = 0.0;
    for (double x = lo; x < hi; x += 1.0) {
      double e = 0.0;
      sum += gauss_kronrod<double, 61>::integrate(integrand, x, std::min(hi, x + 1.0), 15, 1e-12, &e);
      err += e;
    }
    return sum;
  };
  double err_core = 0.0, err_clad = 0.0;
  const double core = panels(0.0, 1.0, err_core);
  const double clad = panels(1.0, 1.0 + kCladdingDecayWidths / w_, err_clad);
  const double total = core + clad;
  const double abs_err = err_core + err_clad;
  return {core, clad, total != 0.0 ? abs_err / std::abs(total) : 1.0};
}

ModeSolution solve_he11(const FiberSpec& spec, double wavelength) {
  spec.validate();
  const auto root = solve_root(spec, wavelength);
  ModeSolution sol;
  sol.wavelength = wavelength;
  sol.core_index = root.n1;
  sol.cladding_index = spec.cladding_index;
  sol.v_number = v_number(spec, wavelength);
  sol.multimode = sol.v_number > kSingleModeCutoff;
  sol.guided_roots = root.roots;
  sol.n_eff = root.n_eff;
  sol.dispersion_residual = root.residual;
  const double k0 = 2.0 * phys::kPi / wavelength;
  sol.beta = sol.n_eff * k0;
  const double n2 = spec.cladding_index;
  sol.decay_length_xi = 1.0 / std::sqrt(sol.beta * sol.beta - k0 * k0 * n2 * n2);

  const He11Fields fields(spec, wavelength, sol.n_eff);
  const auto split = fields.power_split();
  if (!(split.error < kQuadratureTolerance) || !(split.core > 0.0) || !(split.cladding > 0.0)) {
    std::ostringstream os;
    os << "evanescent-fraction quadrature did not converge: core=" << split.core
       << " cladding=" << split.cladding << " relative error=" << split.error
       << " (tolerance " << kQuadratureTolerance << ")";
    throw NumericalError(os.str());
  }
  sol.evanescent_fraction_eta = split.cladding / (split.core + split.cladding);
  sol.quadrature_error = split.error;
  sol.group_index_ng = group_index(spec, wavelength);
  return sol;
}

double group_index(const FiberSpec& spec, double wavelength, double dlambda) {
  auto n_at = [&](double lam) {
    try {
      return solve_root(spec, lam).n_eff;
    } catch (const NoGuidedModeError&) {
      throw NoGuidedModeError("group index: guided mode lost at stencil wavelength " +
                              format_nm(lam));
    }
  };
  const double n_plus = n_at(wavelength + dlambda);
  const double n_minus = n_at(wavelength - dlambda);
  const double n0 = n_at(wavelength);
  return n0 - wavelength * (n_plus - n_minus) / (2.0 * dlambda);
}

std::vector<SweepRow> dispersion_sweep(const FiberSpec& base, std::span<const double> diameters,
                                       std::span<const double> wavelengths) {
  std::vector<SweepRow> rows;
  rows.reserve(diameters.size() * wavelengths.size());
  for (double d : diameters) {
    FiberSpec spec = base;
    spec.diameter = d;
    for (double lam : wavelengths) rows.push_back({d, lam, solve_he11(spec, lam)});
  }
  return rows;
}

}  // namespace tpa::optics
