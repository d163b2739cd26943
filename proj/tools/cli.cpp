#include "cli.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>

#include "tapertpa/config.hpp"
#include "tapertpa/error.hpp"
#include "tapertpa/fitting.hpp"
#include "tapertpa/lineshape.hpp"
#include "tapertpa/photon_budget.hpp"
#include "tapertpa/spectrum_io.hpp"
#include "tapertpa/transit_mc.hpp"
#include "tapertpa/units.hpp"
#include "tapertpa/wave_optics.hpp"

namespace tpa::cli {

namespace fs = std::filesystem;
using units::Dimension;

namespace {

constexpr const char* kToolVersion = "0.1.0";

struct Common {
  std::string config;
  std::string output_dir;
  std::string stem;
  std::optional<std::uint64_t> seed;
  std::string grid_min, grid_max, grid_step;
};

struct Options {
  Common common;
  // mode
  std::string diameter, wavelength;
  bool sweep = false;
  // simulate / mc
  std::string kind;
  std::optional<std::uint64_t> n_trajectories;
  std::string xi;
  unsigned threads = 0;
  // fit
  std::string input;
  std::optional<int> n_dips;
  bool fit_lorentzian = false, fit_gaussian = false, no_model_widths = false;
  std::string fix_tau0;
  std::vector<std::string> bounds;
  // budget
  std::string power, group_velocity, length;
};

double quantity(const std::string& text, Dimension dim, const std::string& flag) {
  try {
    return units::parse_quantity(text, dim);
  } catch (const Error& e) {
    throw ConfigError("--" + flag + ": " + e.what());
  }
}

RunConfig load(const Common& c) {
  RunConfig cfg = c.config.empty() ? default_run_config() : load_run_config(c.config);
  if (!c.output_dir.empty()) cfg.io.output_dir = c.output_dir;
  if (!c.stem.empty()) cfg.io.stem = c.stem;
  if (c.seed) cfg.seed = *c.seed;
  return cfg;
}

DetuningGrid override_grid(DetuningGrid g, const Common& c) {
  if (!c.grid_min.empty()) g.min = quantity(c.grid_min, Dimension::kFrequency, "grid-min");
  if (!c.grid_max.empty()) g.max = quantity(c.grid_max, Dimension::kFrequency, "grid-max");
  if (!c.grid_step.empty()) g.step = quantity(c.grid_step, Dimension::kFrequency, "grid-step");
  g.validate();
  return g;
}

fs::path output_path(const RunConfig& cfg, const std::string& fallback_stem, const std::string& ext) {
  const std::string stem = cfg.io.stem.empty() ? fallback_stem : cfg.io.stem;
  return cfg.io.output_dir / (stem + ext);
}

nlohmann::json header(const std::string& schema, const RunConfig& cfg) {
  return {{"schema", schema}, {"tool_version", kToolVersion}, {"config", to_json(cfg)}};
}

nlohmann::json mode_json(const optics::FiberSpec& fiber, const optics::ModeSolution& m) {
  return {{"diameter_m", fiber.diameter},
          {"wavelength_m", m.wavelength},
          {"core_index", m.core_index},
          {"cladding_index", m.cladding_index},
          {"v_number", m.v_number},
          {"multimode", m.multimode},
          {"guided_roots", m.guided_roots},
          {"n_eff", m.n_eff},
          {"beta_rad_per_m", m.beta},
          {"decay_length_xi_m", m.decay_length_xi},
          {"evanescent_fraction_eta", m.evanescent_fraction_eta},
          {"group_index_ng", m.group_index_ng},
          {"ng_at_least_n_eff", m.group_index_ng >= m.n_eff},
          {"dispersion_residual", m.dispersion_residual},
          {"quadrature_error", m.quadrature_error}};
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

int cmd_mode(const Options& o, std::ostream& out) {
  RunConfig cfg = load(o.common);
  if (!o.diameter.empty()) cfg.fiber.diameter = quantity(o.diameter, Dimension::kLength, "diameter");
  if (!o.wavelength.empty()) cfg.mode.wavelength = quantity(o.wavelength, Dimension::kLength, "wavelength");
  cfg.fiber.validate();
  const auto m = optics::solve_he11(cfg.fiber, cfg.mode.wavelength);
  auto j = header("tapertpa/mode/1", cfg);
  j["mode"] = mode_json(cfg.fiber, m);
  const fs::path json_path = output_path(cfg, "mode", ".json");

  if (o.sweep) {
    std::vector<double> diameters = cfg.mode.sweep_diameters;
    if (diameters.empty()) {
      for (int i = 0; i < 9; ++i) diameters.push_back((250.0 + 31.25 * i) * 1e-9);
    }
    std::vector<double> wavelengths = cfg.mode.sweep_wavelengths;
    if (wavelengths.empty()) wavelengths.push_back(cfg.mode.wavelength);
    const auto rows = optics::dispersion_sweep(cfg.fiber, diameters, wavelengths);
    std::string csv = "diameter_nm,wavelength_nm,n_eff,n_g,eta,xi_nm\n";
    char buf[192];
    for (const auto& r : rows) {
      const int n = std::snprintf(buf, sizeof buf, "%.9g,%.9g,%.12g,%.12g,%.12g,%.9g\n", r.diameter * 1e9,
                                  r.wavelength * 1e9, r.mode.n_eff, r.mode.group_index_ng,
                                  r.mode.evanescent_fraction_eta, r.mode.decay_length_xi * 1e9);
      csv.append(buf, static_cast<std::size_t>(n));
    }
    const fs::path sweep_path = output_path(cfg, "mode", "_sweep.csv");
    io::atomic_write(sweep_path, csv);
    j["sweep_csv"] = sweep_path.filename().string();
  }
  io::write_json(json_path, j);
  out << "HE11 mode at d = " << fmt("%.6g", cfg.fiber.diameter * 1e9) << " nm, lambda = "
      << fmt("%.6g", cfg.mode.wavelength * 1e9) << " nm\n"
      << "  V        " << fmt("%.6f", m.v_number) << (m.multimode ? " (multimode)" : "") << "\n"
      << "  n_eff    " << fmt("%.8f", m.n_eff) << "\n"
      << "  n_g      " << fmt("%.6f", m.group_index_ng) << "\n"
      << "  xi       " << fmt("%.3f", m.decay_length_xi * 1e9) << " nm\n"
      << "  eta      " << fmt("%.6f", m.evanescent_fraction_eta) << "\n"
      << "wrote " << json_path.string() << "\n";
  return kOk;
}

int write_spectrum(const RunConfig& cfg, const std::string& kind, const SpectrumData& s,
                   const nlohmann::json& extra, std::ostream& out) {
  const std::string stem = kind;
  const fs::path csv = output_path(cfg, stem, ".csv");
  const fs::path json = output_path(cfg, stem, ".json");
  auto j = header(kind == "mc" ? "tapertpa/mc/1" : "tapertpa/spectrum/1", cfg);
  j["kind"] = kind;
  j["csv"] = csv.filename().string();
  j["n_points"] = s.size();
  j["metadata"] = s.metadata;
  for (const auto& [k, v] : extra.items()) j[k] = v;
  io::write_spectrum_csv(csv, s);
  io::write_json(json, j);
  out << "wrote " << csv.string() << " and " << json.string() << "\n";
  return kOk;
}

int run_mc(const Options& o, RunConfig cfg, std::ostream& out) {
  if (o.n_trajectories) cfg.mc.n_trajectories = *o.n_trajectories;
  if (!o.xi.empty()) cfg.mc.decay_length_xi = quantity(o.xi, Dimension::kLength, "xi");
  if (o.threads) cfg.mc.threads = o.threads;
  auto mc = make_mc_config(cfg);
  if (!o.common.grid_min.empty() || !o.common.grid_max.empty() || !o.common.grid_step.empty()) {
    mc.grid = override_grid(mc.grid, o.common);
  }
  const auto r = mc::mc_lineshape(mc);
  nlohmann::json stats = {{"n_effective", r.n_effective},
                          {"mean_interaction_time_s", r.mean_interaction_time},
                          {"fitted_tau0_s", r.fitted_tau0},
                          {"fit_converged", r.fit_converged},
                          {"seed", mc.seed},
                          {"n_trajectories", mc.n_trajectories}};
  out << "MC: " << r.n_effective << " trajectories, mean interaction time "
      << fmt("%.4g", r.mean_interaction_time * 1e9) << " ns, fitted tau0 "
      << fmt("%.4g", r.fitted_tau0 * 1e9) << " ns\n";
  return write_spectrum(cfg, "mc", r.spectrum, {{"stats", stats}}, out);
}

int cmd_simulate(const Options& o, std::ostream& out) {
  RunConfig cfg = load(o.common);
  if (o.kind == "two-photon") {
    cfg.two_photon.grid = override_grid(cfg.two_photon.grid, o.common);
    const auto s = lineshape::synthesize_two_photon(cfg.two_photon);
    return write_spectrum(cfg, "two-photon", s, nlohmann::json::object(), out);
  }
  if (o.kind == "single-photon") {
    cfg.single_photon.grid = override_grid(cfg.single_photon.grid, o.common);
    const auto s = lineshape::synthesize_single_photon(cfg.vapor, cfg.single_photon.probe_power,
                                                       cfg.single_photon.psat, cfg.single_photon.grid,
                                                       cfg.constants.reference_line);
    return write_spectrum(cfg, "single-photon", s, nlohmann::json::object(), out);
  }
  return run_mc(o, cfg, out);
}

int cmd_fit(const Options& o, std::ostream& out, std::ostream& err) {
  RunConfig cfg = load(o.common);
  fs::path input = o.input.empty() ? cfg.io.input.value_or(fs::path()) : fs::path(o.input);
  if (input.empty()) throw ConfigError("fit needs --input or io.input in the config");
  const auto ing = io::read_spectrum_csv(input);
  for (const auto& w : ing.warnings) err << "warning: " << input.string() << ": " << w << "\n";
  if (o.no_model_widths) cfg.fit.widths_from_model = false;
  auto spec = make_fit_spec(cfg);
  if (o.n_dips) spec.n_dips = *o.n_dips;
  if (o.fit_lorentzian) spec.fit_lorentzian_width = true;
  if (o.fit_gaussian) spec.fit_gaussian_sigma = true;
  if (!o.fix_tau0.empty()) {
    fit::FitParameters guess = spec.initial_guess.value_or(fit::FitParameters{});
    guess.tau0 = quantity(o.fix_tau0, Dimension::kTime, "fix-tau0");
    spec.fit_tau0 = false;
    if (!spec.initial_guess) {
      throw ConfigError("--fix-tau0 needs fit.initial_guess centers and depths in the config");
    }
    spec.initial_guess = guess;
  }
  for (const auto& b : o.bounds) {
    const auto eq = b.find('=');
    const auto comma = b.find(',', eq == std::string::npos ? 0 : eq);
    if (eq == std::string::npos || comma == std::string::npos) {
      throw ConfigError("--bound expects name=lo,hi, got '" + b + "'");
    }
    const std::string key = b.substr(0, eq);
    const Dimension dim = key.rfind("center", 0) == 0 || key == "lorentzian_width" || key == "gaussian_sigma"
                              ? Dimension::kFrequency
                              : key == "tau0" ? Dimension::kTime : Dimension::kDimensionless;
    spec.bounds[key] = {quantity(b.substr(eq + 1, comma - eq - 1), dim, "bound"),
                        quantity(b.substr(comma + 1), dim, "bound")};
  }
  spec.validate();
  const auto r = fit::fit_cusp(ing.data, spec);
  const auto rep = fit::residual_report(ing.data, r);
  auto j = header("tapertpa/fit/1", cfg);
  j["input"] = {{"filename", ing.filename},
                {"detuning_column", ing.detuning_column},
                {"transmission_column", ing.transmission_column},
                {"detuning_unit", ing.detuning_unit},
                {"warnings", ing.warnings}};
  j["result"] = fit::to_json(r);
  j["residuals"] = {{"rms", rep.rms}, {"max_abs", rep.max_abs}, {"runs", rep.runs}, {"runs_z", rep.runs_z}};
  const fs::path path = output_path(cfg, "fit", ".json");
  io::write_json(path, j);

  char line[160];
  std::snprintf(line, sizeof line, "%-18s %18s %-4s %18s\n", "parameter", "value", "unit", "uncertainty");
  out << line;
  for (std::size_t i = 0; i < r.names.size(); ++i) {
    std::snprintf(line, sizeof line, "%-18s %18.10g %-4s %18.6g\n", r.names[i].c_str(), r.values[i],
                  fit::parameter_unit(r.names[i]).c_str(), r.uncertainties[i]);
    out << line;
  }
  std::snprintf(line, sizeof line, "%-18s %18.10g %-4s\n", "fwhm", r.fwhm_hz, "Hz");
  out << line;
  std::snprintf(line, sizeof line, "%-18s %18.6g\n", "rms_residual", r.rms_residual);
  out << line;
  out << "converged: " << (r.converged ? "yes" : "no") << " after " << r.n_evaluations << " evaluations\n";
  for (const auto& w : r.warnings) err << "warning: " << w << "\n";
  out << "wrote " << path.string() << "\n";
  return r.converged ? kOk : kFitNotConverged;
}

int cmd_budget(const Options& o, std::ostream& out) {
  RunConfig cfg = load(o.common);
  if (!o.power.empty()) cfg.budget.power = quantity(o.power, Dimension::kPower, "power");
  if (!o.length.empty()) cfg.fiber.length = quantity(o.length, Dimension::kLength, "length");
  if (o.group_velocity == "solver") {
    cfg.budget.group_velocity.reset();
  } else if (!o.group_velocity.empty()) {
    cfg.budget.group_velocity = quantity(o.group_velocity, Dimension::kSpeed, "group-velocity");
  }
  budget::BudgetResult r;
  if (cfg.budget.group_velocity) {
    r = budget::estimate_budget({cfg.budget.power, cfg.fiber.length, *cfg.budget.group_velocity,
                                 cfg.budget.wavelength});
  } else {
    r = budget::budget_from_mode(cfg.budget.power, cfg.fiber, cfg.budget.wavelength);
  }
  auto j = header("tapertpa/budget/1", cfg);
  j["input"] = {{"total_power_w", cfg.budget.power},
                {"waist_length_m", cfg.fiber.length},
                {"photon_wavelength_m", cfg.budget.wavelength}};
  j["result"] = budget::to_json(r);
  const fs::path path = output_path(cfg, "budget", ".json");
  io::write_json(path, j);
  out << "transit time   " << fmt("%.6g", r.transit_time) << " s\n"
      << "energy         " << fmt("%.6g", r.energy) << " J\n"
      << "photon number  " << fmt("%.6g", r.photon_number) << " (group index "
      << fmt("%.6g", r.group_index) << ", " << r.group_index_source << ")\n";
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Two-photon absorption in tapered optical fibers: mode solver, spectra, fits, photon budget"};
  app.name("tapertpa");
  app.require_subcommand(1);
  Options o;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("-c,--config", o.common.config, "run configuration file (YAML)");
    sub->add_option("-o,--output-dir", o.common.output_dir, "directory for output files");
    sub->add_option("--stem", o.common.stem, "output file stem");
    sub->add_option("--seed", o.common.seed, "64-bit seed");
  };
  auto add_grid = [&](CLI::App* sub) {
    sub->add_option("--grid-min", o.common.grid_min, "detuning grid start, e.g. \"-500 MHz\"");
    sub->add_option("--grid-max", o.common.grid_max, "detuning grid end");
    sub->add_option("--grid-step", o.common.grid_step, "detuning grid step");
  };

  auto* mode = app.add_subcommand("mode", "solve the HE11 mode");
  add_common(mode);
  mode->add_option("--diameter", o.diameter, "fiber diameter, e.g. \"350 nm\"");
  mode->add_option("--wavelength", o.wavelength, "wavelength, e.g. \"780 nm\"");
  mode->add_flag("--sweep", o.sweep, "also write a dispersion sweep CSV");

  auto* sim = app.add_subcommand("simulate", "synthesize a spectrum");
  add_common(sim);
  add_grid(sim);
  sim->add_option("kind", o.kind, "single-photon | two-photon | mc")
      ->required()
      ->check(CLI::IsMember({"single-photon", "two-photon", "mc"}));
  sim->add_option("-n,--n-trajectories", o.n_trajectories, "MC trajectory count");
  sim->add_option("--xi", o.xi, "MC decay length override");
  sim->add_option("--threads", o.threads, "MC worker threads");

  auto* mc = app.add_subcommand("mc", "Monte Carlo transit-time line shape");
  add_common(mc);
  add_grid(mc);
  mc->add_option("-n,--n-trajectories", o.n_trajectories, "trajectory count");
  mc->add_option("--xi", o.xi, "decay length override, e.g. \"271 nm\"");
  mc->add_option("--threads", o.threads, "worker threads");

  auto* fitc = app.add_subcommand("fit", "fit broadened-cusp dips to a spectrum CSV");
  add_common(fitc);
  fitc->add_option("-i,--input", o.input, "spectrum CSV");
  fitc->add_option("--n-dips", o.n_dips, "number of dips");
  fitc->add_flag("--fit-lorentzian", o.fit_lorentzian, "fit the Lorentzian half-width");
  fitc->add_flag("--fit-gaussian", o.fit_gaussian, "fit the Gaussian sigma");
  fitc->add_flag("--no-model-widths", o.no_model_widths, "hold widths at zero instead of the model values");
  fitc->add_option("--fix-tau0", o.fix_tau0, "hold tau0 fixed");
  fitc->add_option("--bound", o.bounds, "parameter bound name=lo,hi, e.g. tau0=\"1 ns,1.001 ns\"");

  auto* bud = app.add_subcommand("budget", "energy and photon number in the waist");
  add_common(bud);
  bud->add_option("--power", o.power, "total power, e.g. \"200 nW\"");
  bud->add_option("--length", o.length, "waist length");
  bud->add_option("--group-velocity", o.group_velocity, "pinned group velocity, or \"solver\"");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n" << app.help();
    return kUsageOrIo;
  }

  try {
    if (*mode) return cmd_mode(o, out);
    if (*sim) return cmd_simulate(o, out);
    if (*mc) {
      o.kind = "mc";
      return cmd_simulate(o, out);
    }
    if (*fitc) return cmd_fit(o, out, err);
    if (*bud) return cmd_budget(o, out);
  } catch (const NoGuidedModeError& e) {
    err << "error: no guided mode: " << e.what() << "\n";
    return kPhysics;
  } catch (const DomainError& e) {
    err << "error: " << e.what() << "\n";
    return kPhysics;
  } catch (const NumericalError& e) {
    err << "error: " << e.what() << "\n";
    return kPhysics;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n" << "usage: tapertpa <mode|simulate|fit|budget|mc> --config FILE\n";
    return kUsageOrIo;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kUsageOrIo;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kUsageOrIo;
  }
  return kUsageOrIo;
}

}  // namespace tpa::cli
