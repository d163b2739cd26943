// Acceptance gate: one PASS/FAIL line per criterion; exit status 1 if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>

#include "tapertpa/config.hpp"
#include "tapertpa/fitting.hpp"
#include "tapertpa/lineshape.hpp"
#include "tapertpa/photon_budget.hpp"
#include "tapertpa/spectrum_io.hpp"
#include "tapertpa/transit_mc.hpp"
#include "tapertpa/wave_optics.hpp"
#include "test_support.hpp"

namespace {

using namespace tpa;
namespace t = tpa::testing;

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void check(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << "[failed: " << what << "] ";
    }
  }
};

std::string num(double v, int digits = 6) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

lineshape::TwoPhotonModel bare_dip(double step) {
  lineshape::TwoPhotonModel m;
  m.transit = vapor::TransitModel::from_tau0(2.05e-9, 270.0);
  m.dips = {{0.0, 0.0, 0.3}};
  m.broadening.doppler = false;
  m.broadening.power_broadening = false;
  m.grid = {-500e6, 500e6, step};
  return m;
}

fit::FitModelSpec spec_for(const lineshape::TwoPhotonModel& m) {
  const auto w = lineshape::dip_widths(m);
  fit::FitModelSpec spec;
  spec.n_dips = static_cast<int>(m.dips.size());
  spec.fixed_widths = fit::FixedWidths{w.lorentzian_hwhm, w.gaussian_sigma};
  return spec;
}

bool rel_ok(double a, double b, double rel) { return std::abs(a - b) <= rel * std::abs(b); }

void criterion1(Outcome& o) {
  const auto r = budget::estimate_budget({200e-9, 5e-3, 2.062e8, 780e-9});
  o.check(rel_ok(r.energy, 4.85e-18, 0.01), "energy within 1% of 4.85e-18 J");
  o.check(r.photon_number > 18.5 && r.photon_number < 19.5, "photon number in (18.5, 19.5)");
  o.detail << "energy " << num(r.energy) << " J, photons " << num(r.photon_number);
}

void criterion2(Outcome& o) {
  const double tau0 = 2.05e-9, step = 0.1e6;
  SpectrumData s;
  for (int i = -20000; i <= 20000; ++i) {
    s.detuning.push_back(i * step);
    s.transmission.push_back(1.0 - 0.3 * lineshape::cusp(2 * std::numbers::pi * i * step, tau0));
  }
  const double analytic = lineshape::cusp_fwhm(tau0);
  const double numeric = fit::fwhm_numeric(s);
  o.check(std::abs(analytic - 107.6e6) < 0.05e6, "analytic FWHM 107.6 MHz");
  o.check(std::abs(numeric - analytic) <= step, "numeric within one grid step");
  o.detail << "analytic " << num(analytic / 1e6) << " MHz, numeric " << num(numeric / 1e6) << " MHz";
}

void criterion3(Outcome& o) {
  const auto m = bare_dip(0.5e6);
  const auto clean = lineshape::synthesize_two_photon(m);
  const auto a = fit::fit_cusp(clean, fit::FitModelSpec{});
  o.check(a.converged, "noiseless fit converged");
  o.check(rel_ok(a.parameters.tau0, 2.05e-9, 1e-3), "tau0 0.1%");
  o.check(rel_ok(a.parameters.depths.at(0), 0.3, 1e-3), "depth 0.1%");
  o.check(rel_ok(a.parameters.baseline, 1.0, 1e-3), "baseline 0.1%");
  // A zero center has no relative scale; 0.1% of the FWHM stands in for it.
  o.check(std::abs(a.parameters.centers.at(0)) <= 1e-3 * lineshape::cusp_fwhm(2.05e-9), "center");
  auto noisy = clean;
  std::mt19937_64 rng(2024);
  std::normal_distribution<double> noise(0.0, 0.01);
  for (double& y : noisy.transmission) y += noise(rng);
  const auto b = fit::fit_cusp(noisy, fit::FitModelSpec{});
  o.check(b.converged, "noisy fit converged");
  o.check(rel_ok(b.parameters.tau0, 2.05e-9, 0.05), "noisy tau0 5%");
  o.detail << "noiseless tau0 " << num(a.parameters.tau0 * 1e9, 10) << " ns, depth "
           << num(a.parameters.depths.at(0), 10) << ", baseline " << num(a.parameters.baseline, 10)
           << ", center " << num(a.parameters.centers.at(0)) << " Hz; noisy tau0 "
           << num(b.parameters.tau0 * 1e9) << " ns";
}

void criterion4(Outcome& o) {
  auto narrow = bare_dip(0.5e6);
  auto broad = narrow;
  broad.broadening.power_broadening = true;
  broad.power1 = 726e-9;
  broad.reference_power1 = 726e-9;
  const auto a = fit::fit_cusp(lineshape::synthesize_two_photon(narrow), spec_for(narrow));
  const auto b = fit::fit_cusp(lineshape::synthesize_two_photon(broad), spec_for(broad));
  o.check(a.converged && b.converged, "fits converged");
  o.check(b.fwhm_hz > a.fwhm_hz, "Lorentzian > 0 widens fitted FWHM");
  o.detail << "FWHM zero/finite Lorentzian " << num(a.fwhm_hz / 1e6) << " / " << num(b.fwhm_hz / 1e6)
           << " MHz; default model vs power1:";
  double previous = 0.0;
  for (double p : {30e-9, 146e-9, 726e-9, 2920e-9}) {
    auto m = bare_dip(0.1e6);
    m.broadening = lineshape::BroadeningSettings{};
    m.power1 = p;
    m.reference_power1 = p;
    const auto r = fit::fit_cusp(lineshape::synthesize_two_photon(m), spec_for(m));
    o.check(r.converged, "default-model fit converged");
    o.check(r.fwhm_hz > previous, "monotone in power");
    previous = r.fwhm_hz;
    o.detail << " " << num(p * 1e9, 4) << " nW->" << num(r.fwhm_hz / 1e6, 5) << " MHz";
  }
}

void criterion5(Outcome& o) {
  const double gamma = 6.0666e6, d = 1000 * gamma;
  const double ratio =
      lineshape::off_resonant_depth(2 * d, gamma, 1.0) / lineshape::off_resonant_depth(d, gamma, 1.0);
  o.check(std::abs(ratio - 0.25) <= 0.003, "ratio 0.250 +- 0.003");
  o.detail << "depth(2 delta)/depth(delta) = " << num(ratio, 9);
}

void criterion6(Outcome& o) {
  const auto cfg = load_run_config(t::data_dir() / "configs" / "paper_default.yaml");
  const auto& sp = cfg.single_photon;
  const double ref = cfg.constants.reference_line;
  const auto s = lineshape::synthesize_single_photon(cfg.vapor, sp.probe_power, sp.psat, sp.grid, ref);
  const auto minima = t::local_minima(s.transmission);
  o.check(minima.size() == 4, "exactly 4 minima");
  o.detail << minima.size() << " minima";
  const auto lines = vapor::line_list(cfg.vapor, ref);
  if (minima.size() == 4 && lines.size() == 4) {
    for (const auto& iso : cfg.vapor.isotopes) {
      std::vector<double> at;
      for (std::size_t i = 0; i < 4; ++i) {
        if (lines[i].isotope == iso.name) at.push_back(s.detuning[minima[i]]);
      }
      const double spacing = at.size() == 2 ? std::abs(at[1] - at[0]) : 0.0;
      o.check(std::abs(spacing - iso.ground_hyperfine_splitting) <= sp.grid.step,
              iso.name + " spacing within one grid step");
      o.detail << "; " << iso.name << " spacing " << num(spacing / 1e9, 7) << " GHz (configured "
               << num(iso.ground_hyperfine_splitting / 1e9, 7) << ")";
    }
  }
  const auto dark = lineshape::synthesize_single_photon(cfg.vapor, 0.0, sp.psat, sp.grid, ref);
  const auto sat = lineshape::synthesize_single_photon(cfg.vapor, sp.psat, sp.psat, sp.grid, ref);
  double worst = 0.0;
  for (std::size_t i = 0; i < dark.size(); ++i) {
    const double od0 = -std::log(dark.transmission[i]);
    const double od1 = -std::log(sat.transmission[i]);
    worst = std::max(worst, std::abs(od1 - 0.5 * od0));
  }
  o.check(worst < 1e-12, "optical depths halve at psat");
  o.detail << "; max |OD(psat) - OD(0)/2| " << num(worst, 3);
}

void criterion7(Outcome& o) {
  const double m = t::rb85_mass();
  const double counter = lineshape::doppler_kernel_sigma(lineshape::Geometry::kCounter, 780e-9, 776e-9, 373.15, m);
  const double co = lineshape::doppler_kernel_sigma(lineshape::Geometry::kCo, 780e-9, 776e-9, 373.15, m);
  o.check(std::abs(counter / co - 2.57e-3) <= 1e-4, "sigma ratio 2.57e-3");
  const auto cfg = load_run_config(t::data_dir() / "configs" / "two_dip_fig6.yaml");
  auto model = cfg.two_photon;
  model.geometry = lineshape::Geometry::kCounter;
  const auto sc = lineshape::synthesize_two_photon(model);
  const auto mc = t::local_minima(sc.transmission);
  o.check(mc.size() == 2, "counter geometry resolves two minima");
  model.geometry = lineshape::Geometry::kCo;
  model.grid.step = 0.5e6;
  const auto so = lineshape::synthesize_two_photon(model);
  const auto mo = t::local_minima(so.transmission);
  o.check(mo.size() == 1, "co geometry single local minimum");
  const auto w = lineshape::dip_widths(model);
  o.detail << "sigma ratio " << num(counter / co, 6) << "; counter minima " << mc.size()
           << ", co minima " << mo.size() << " (co sigma " << num(w.gaussian_sigma / 1e6, 4)
           << " MHz, dip spacing 3035.7 MHz)";
}

void criterion8(Outcome& o) {
  const auto f = t::silica_fiber(350e-9);
  const double v = optics::v_number(f, 780e-9);
  o.check(std::abs(v - 1.487) <= 0.001, "V = 1.487 +- 0.001");
  const auto s = optics::solve_he11(f, 780e-9);
  o.check(s.guided_roots == 1, "single HE11 root");
  o.check(s.n_eff > 1.0 && s.n_eff < s.core_index, "1 < n_eff < n1");
  const auto big = t::silica_fiber(10e-6);
  const auto b = optics::solve_he11(big, 780e-9);
  const double bulk_ng = big.core_index_model.group_index(780e-9);
  o.check(std::abs(b.n_eff - b.core_index) <= 1e-3, "d = 10 um n_eff within 1e-3 of n1");
  o.check(std::abs(b.group_index_ng - bulk_ng) <= 1e-2, "d = 10 um n_g within 1e-2 of bulk");
  o.detail << "V " << num(v, 7) << ", roots " << s.guided_roots << ", n_eff " << num(s.n_eff, 9)
           << "; 10 um: n1 - n_eff " << num(b.core_index - b.n_eff, 4) << ", n_g - bulk "
           << num(b.group_index_ng - bulk_ng, 4);
}

double excess_kurtosis(const std::vector<double>& x, const std::vector<double>& y) {
  double m0 = 0, m1 = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    m0 += y[i];
    m1 += y[i] * x[i];
  }
  const double mean = m1 / m0;
  double m2 = 0, m4 = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d2 = (x[i] - mean) * (x[i] - mean);
    m2 += y[i] * d2;
    m4 += y[i] * d2 * d2;
  }
  m2 /= m0;
  m4 /= m0;
  return m4 / (m2 * m2) - 3.0;
}

// Kurtosis of the MC curve minus that of a Gaussian with the same FWHM on the same grid.
double kurtosis_excess_over_gaussian(const SpectrumData& s) {
  const auto& x = s.detuning;
  const auto& y = s.transmission;
  const std::size_t k = t::argmax(y);
  std::size_t r = k;
  while (r + 1 < y.size() && y[r + 1] > 0.5) ++r;
  const double xr = x[r] + (y[r] - 0.5) / (y[r] - y[r + 1]) * (x[r + 1] - x[r]);
  const double sigma = 2 * (xr - x[k]) / (2 * std::sqrt(2 * std::log(2.0)));
  std::vector<double> g(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) g[i] = std::exp(-0.5 * x[i] * x[i] / (sigma * sigma));
  return excess_kurtosis(x, y) - excess_kurtosis(x, g);
}

struct McRuns {
  mc::McConfig config;
  mc::McResult base;
  bool ran = false;
};

McRuns& paper_mc() {
  static McRuns runs;
  if (!runs.ran) {
    const auto cfg = load_run_config(t::data_dir() / "configs" / "mc_default.yaml");
    runs.config = make_mc_config(cfg);
    runs.config.n_trajectories = 100000;
    runs.base = mc::mc_lineshape(runs.config);
    runs.ran = true;
  }
  return runs;
}

void criterion9(Outcome& o) {
  auto& runs = paper_mc();
  const auto& a = runs.base;
  const auto& y = a.spectrum.transmission;
  const std::size_t n = y.size();
  double asym = 0.0;
  for (std::size_t i = 0; i < n; ++i) asym = std::max(asym, std::abs(y[i] - y[n - 1 - i]));
  o.check(asym < 1e-12, "symmetric");
  const double kurt = kurtosis_excess_over_gaussian(a.spectrum);
  o.check(kurt > 0.0, "heavier-tailed than matched Gaussian");

  mc::McConfig doubled = mc::McConfig::make(runs.config.fiber_radius, 2 * runs.config.decay_length_xi,
                                            runs.config.temperature, runs.config.mass);
  doubled.n_trajectories = runs.config.n_trajectories;
  doubled.seed = runs.config.seed;
  const auto b = mc::mc_lineshape(doubled);
  const double ratio = b.fitted_tau0 / a.fitted_tau0;
  o.check(a.fit_converged && b.fit_converged, "fits converged");
  o.check(std::abs(ratio - 2.0) <= 0.1, "tau0 doubles within 5%");

  mc::McConfig again = runs.config;
  again.threads = 2;
  const auto c = mc::mc_lineshape(again);
  const bool identical = io::format_spectrum_csv(c.spectrum) == io::format_spectrum_csv(a.spectrum) &&
                         c.spectrum.transmission == a.spectrum.transmission &&
                         c.fitted_tau0 == a.fitted_tau0;
  o.check(identical, "bit-identical rerun");
  o.detail << "N " << runs.config.n_trajectories << ", max asymmetry " << num(asym, 3)
           << ", kurtosis excess over Gaussian " << num(kurt, 4) << ", tau0(xi) "
           << num(a.fitted_tau0 * 1e9, 5) << " ns, tau0(2 xi) " << num(b.fitted_tau0 * 1e9, 5)
           << " ns, ratio " << num(ratio, 5) << ", rerun " << (identical ? "identical" : "differs");
}

void criterion10(Outcome& o) {
  auto& runs = paper_mc();
  const double tau0 = runs.base.fitted_tau0;
  o.check(runs.base.fit_converged, "fit converged");
  o.check(tau0 >= 0.5e-9 && tau0 <= 8e-9, "tau0 in [0.5, 8] ns");
  o.detail << "xi " << num(runs.config.decay_length_xi * 1e9, 6) << " nm, fitted tau0 "
           << num(tau0 * 1e9, 5) << " ns (base run shared with criterion 9)";
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    double budget_s;
    std::function<void(Outcome&)> run;
  };
  const Criterion criteria[] = {
      {1, 0.1, criterion1}, {2, 1.0, criterion2},   {3, 10.0, criterion3}, {4, 10.0, criterion4},
      {5, 0.1, criterion5}, {6, 1.0, criterion6},   {7, 5.0, criterion7},  {8, 5.0, criterion8},
      {9, 60.0, criterion9}, {10, 60.0, criterion10},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    Outcome o;
    const auto start = std::chrono::steady_clock::now();
    try {
      c.run(o);
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail << "[exception: " << e.what() << "]";
    }
    const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (elapsed > c.budget_s) o.check(false, "runtime over " + num(c.budget_s) + " s");
    if (!o.pass) ++failures;
    std::printf("criterion %2d: %s (%.2f s) %s\n", c.id, o.pass ? "PASS" : "FAIL", elapsed,
                o.detail.str().c_str());
    std::fflush(stdout);
  }
  std::printf("%d of 10 criteria passed\n", 10 - failures);
  return failures == 0 ? 0 : 1;
}
