#include "tapertpa/config.hpp"

#include "tapertpa/error.hpp"
#include "yaml_util.hpp"

#ifndef TAPERTPA_DEFAULT_CONSTANTS
#define TAPERTPA_DEFAULT_CONSTANTS "data/constants/rubidium.yaml"
#endif

namespace tpa {

using units::Dimension;

namespace {

DetuningGrid parse_grid(const YAML::Node& n, const std::string& ctx, DetuningGrid g) {
  if (!n) return g;
  g.min = detail::quantity_or(n, "min", Dimension::kFrequency, ctx, g.min);
  g.max = detail::quantity_or(n, "max", Dimension::kFrequency, ctx, g.max);
  g.step = detail::quantity_or(n, "step", Dimension::kFrequency, ctx, g.step);
  try {
    g.validate();
  } catch (const InputError& e) {
    throw ConfigError(ctx + ": " + e.what());
  }
  return g;
}

std::vector<double> quantity_list(const YAML::Node& n, const std::string& key, Dimension dim,
                                  const std::string& ctx) {
  std::vector<double> out;
  const YAML::Node list = n[key];
  if (!list) return out;
  if (!list.IsSequence()) throw ConfigError(ctx + "." + key + " must be a list");
  for (std::size_t i = 0; i < list.size(); ++i) {
    try {
      out.push_back(units::parse_quantity(list[i].as<std::string>(), dim));
    } catch (const Error& e) {
      throw ConfigError(ctx + "." + key + "[" + std::to_string(i) + "]: " + e.what());
    }
  }
  return out;
}

Dimension bound_dimension(const std::string& key) {
  if (key.rfind("center", 0) == 0 || key == "lorentzian_width" || key == "gaussian_sigma") {
    return Dimension::kFrequency;
  }
  if (key == "tau0") return Dimension::kTime;
  return Dimension::kDimensionless;
}

fit::Bounds parse_bounds(const YAML::Node& n, const std::string& key, const std::string& ctx) {
  if (!n.IsSequence() || n.size() != 2) throw ConfigError(ctx + "." + key + " must be [lo, hi]");
  const Dimension dim = bound_dimension(key);
  try {
    return {units::parse_quantity(n[0].as<std::string>(), dim),
            units::parse_quantity(n[1].as<std::string>(), dim)};
  } catch (const Error& e) {
    throw ConfigError(ctx + "." + key + ": " + e.what());
  }
}

std::filesystem::path relative_to(const std::filesystem::path& base, const std::string& p) {
  const std::filesystem::path path(p);
  if (path.is_absolute() || base.empty()) return path;
  return base.parent_path() / path;
}

void apply_constants(RunConfig& c) {
  c.constants = load_constants(c.constants_path);
  c.fiber.core_index_model = c.constants.core_material;
  c.vapor.isotopes = c.constants.isotopes;
  c.two_photon.broadening.intermediate_linewidth = c.constants.intermediate_linewidth;
  c.two_photon.broadening.mass = c.constants.isotopes.front().mass;
  c.two_photon.lambda1 = c.constants.d2_wavelength;
  c.mc.wavelength.reset();
}

void finish_defaults(RunConfig& c) {
  c.two_photon.broadening.temperature = c.vapor.temperature;
  const double vth = vapor::thermal_speed(c.vapor.temperature, c.two_photon.broadening.mass,
                                          c.vapor.speed_convention);
  c.two_photon.transit = vapor::TransitModel::from_tau0(2.05e-9, vth);
  c.two_photon.dips = {{0.0, 0.0, 0.3}};
}

void parse_body(RunConfig& c, const YAML::Node& root, const std::string& ctx) {
  c.seed = detail::scalar_or<std::uint64_t>(root, "seed", ctx, c.seed);

  if (const YAML::Node f = root["fiber"]) {
    const std::string fctx = ctx + ".fiber";
    c.fiber.diameter = detail::quantity_or(f, "diameter", Dimension::kLength, fctx, c.fiber.diameter);
    c.fiber.length = detail::quantity_or(f, "length", Dimension::kLength, fctx, c.fiber.length);
    c.fiber.cladding_index = detail::scalar_or<double>(f, "cladding_index", fctx, c.fiber.cladding_index);
    try {
      c.fiber.validate();
    } catch (const Error& e) {
      throw ConfigError(fctx + ": " + e.what());
    }
  }

  if (const YAML::Node m = root["mode"]) {
    const std::string mctx = ctx + ".mode";
    c.mode.wavelength = detail::quantity_or(m, "wavelength", Dimension::kLength, mctx, c.mode.wavelength);
    if (const YAML::Node s = m["sweep"]) {
      c.mode.sweep_diameters = quantity_list(s, "diameters", Dimension::kLength, mctx + ".sweep");
      c.mode.sweep_wavelengths = quantity_list(s, "wavelengths", Dimension::kLength, mctx + ".sweep");
    }
  }

  if (const YAML::Node v = root["vapor"]) {
    const std::string vctx = ctx + ".vapor";
    c.vapor.temperature = detail::quantity_or(v, "temperature", Dimension::kTemperature, vctx, c.vapor.temperature);
    c.vapor.optical_depth_scale =
        detail::scalar_or<double>(v, "optical_depth_scale", vctx, c.vapor.optical_depth_scale);
    if (v["speed_convention"]) {
      try {
        c.vapor.speed_convention =
            vapor::parse_speed_convention(detail::scalar<std::string>(v, "speed_convention", vctx));
      } catch (const Error& e) {
        throw ConfigError(vctx + ".speed_convention: " + e.what());
      }
    }
    if (const YAML::Node ab = v["abundances"]) {
      for (auto& iso : c.vapor.isotopes) {
        iso.abundance = detail::scalar_or<double>(ab, iso.name, vctx + ".abundances", iso.abundance);
      }
    }
  }
  try {
    c.vapor.validate();
  } catch (const Error& e) {
    throw ConfigError(ctx + ".vapor: " + e.what());
  }
  c.two_photon.broadening.temperature = c.vapor.temperature;

  if (const YAML::Node t = root["two_photon"]) {
    const std::string tctx = ctx + ".two_photon";
    auto& m = c.two_photon;
    m.lambda1 = detail::quantity_or(t, "lambda1", Dimension::kLength, tctx, m.lambda1);
    m.lambda2 = detail::quantity_or(t, "lambda2", Dimension::kLength, tctx, m.lambda2);
    if (t["geometry"]) {
      try {
        m.geometry = lineshape::parse_geometry(detail::scalar<std::string>(t, "geometry", tctx));
      } catch (const Error& e) {
        throw ConfigError(tctx + ".geometry: " + e.what());
      }
    }
    if (t["isotope"]) {
      m.broadening.mass = c.vapor.isotope(detail::scalar<std::string>(t, "isotope", tctx)).mass;
    }
    m.power1 = detail::quantity_or(t, "power1", Dimension::kPower, tctx, m.power1);
    m.power2 = detail::quantity_or(t, "power2", Dimension::kPower, tctx, m.power2);
    m.reference_power1 = detail::quantity_or(t, "reference_power1", Dimension::kPower, tctx, m.reference_power1);
    m.reference_power2 = detail::quantity_or(t, "reference_power2", Dimension::kPower, tctx, m.reference_power2);
    m.psat = detail::quantity_or(t, "psat", Dimension::kPower, tctx, m.psat);
    m.baseline = detail::scalar_or<double>(t, "baseline", tctx, m.baseline);
    m.broadening.doppler = detail::scalar_or<bool>(t, "doppler", tctx, m.broadening.doppler);
    m.broadening.power_broadening =
        detail::scalar_or<bool>(t, "power_broadening", tctx, m.broadening.power_broadening);
    m.broadening.gamma0 = detail::quantity_or(t, "gamma0", Dimension::kFrequency, tctx, m.broadening.gamma0);
    m.broadening.intermediate_linewidth = detail::quantity_or(
        t, "intermediate_linewidth", Dimension::kFrequency, tctx, m.broadening.intermediate_linewidth);
    const double vth = vapor::thermal_speed(c.vapor.temperature, m.broadening.mass, c.vapor.speed_convention);
    if (t["tau0"] && t["interaction_extent"]) {
      throw ConfigError(tctx + ": give either tau0 or interaction_extent, not both");
    }
    if (t["tau0"]) {
      m.transit = vapor::TransitModel::from_tau0(detail::quantity(t, "tau0", Dimension::kTime, tctx), vth);
    } else if (t["interaction_extent"]) {
      m.transit = vapor::TransitModel::from_extent(
          detail::quantity(t, "interaction_extent", Dimension::kLength, tctx), vth);
    } else {
      m.transit = vapor::TransitModel::from_tau0(m.transit.tau0, vth);
    }
    if (const YAML::Node dips = t["dips"]) {
      m.dips.clear();
      for (std::size_t i = 0; i < dips.size(); ++i) {
        const std::string dctx = tctx + ".dips[" + std::to_string(i) + "]";
        lineshape::DipSpec d;
        d.center_offset = detail::quantity_or(dips[i], "center", Dimension::kFrequency, dctx, 0.0);
        d.intermediate_detuning_delta =
            detail::quantity_or(dips[i], "delta", Dimension::kFrequency, dctx, 0.0);
        d.strength = detail::scalar<double>(dips[i], "strength", dctx);
        m.dips.push_back(d);
      }
    }
    m.grid = parse_grid(t["grid"], tctx + ".grid", m.grid);
    try {
      m.validate();
    } catch (const Error& e) {
      throw ConfigError(tctx + ": " + e.what());
    }
  }

  if (const YAML::Node s = root["single_photon"]) {
    const std::string sctx = ctx + ".single_photon";
    c.single_photon.probe_power =
        detail::quantity_or(s, "probe_power", Dimension::kPower, sctx, c.single_photon.probe_power);
    c.single_photon.psat = detail::quantity_or(s, "psat", Dimension::kPower, sctx, c.single_photon.psat);
    c.single_photon.grid = parse_grid(s["grid"], sctx + ".grid", c.single_photon.grid);
  }

  if (const YAML::Node m = root["mc"]) {
    const std::string mctx = ctx + ".mc";
    auto& s = c.mc;
    s.n_trajectories = detail::scalar_or<std::uint64_t>(m, "n_trajectories", mctx, s.n_trajectories);
    if (m["xi"]) s.decay_length_xi = detail::quantity(m, "xi", Dimension::kLength, mctx);
    if (m["wavelength"]) s.wavelength = detail::quantity(m, "wavelength", Dimension::kLength, mctx);
    if (m["outer_cutoff"]) s.outer_cutoff = detail::quantity(m, "outer_cutoff", Dimension::kLength, mctx);
    if (m["time_step"]) s.time_step = detail::quantity(m, "time_step", Dimension::kTime, mctx);
    if (m["fixed_speed"]) s.fixed_speed = detail::quantity(m, "fixed_speed", Dimension::kSpeed, mctx);
    if (m["grid"]) s.grid = parse_grid(m["grid"], mctx + ".grid", DetuningGrid{});
    s.threads = detail::scalar_or<unsigned>(m, "threads", mctx, s.threads);
  }

  if (const YAML::Node b = root["budget"]) {
    const std::string bctx = ctx + ".budget";
    c.budget.power = detail::quantity_or(b, "power", Dimension::kPower, bctx, c.budget.power);
    c.budget.wavelength = detail::quantity_or(b, "wavelength", Dimension::kLength, bctx, c.budget.wavelength);
    if (b["group_velocity"]) {
      const std::string gv = detail::scalar<std::string>(b, "group_velocity", bctx);
      if (gv == "solver") {
        c.budget.group_velocity.reset();
      } else {
        c.budget.group_velocity = detail::quantity(b, "group_velocity", Dimension::kSpeed, bctx);
      }
    }
  }

  if (const YAML::Node f = root["fit"]) {
    const std::string fctx = ctx + ".fit";
    auto& spec = c.fit.spec;
    spec.n_dips = detail::scalar_or<int>(f, "n_dips", fctx, spec.n_dips);
    spec.fit_tau0 = detail::scalar_or<bool>(f, "fit_tau0", fctx, spec.fit_tau0);
    spec.fit_lorentzian_width = detail::scalar_or<bool>(f, "fit_lorentzian_width", fctx, spec.fit_lorentzian_width);
    spec.fit_gaussian_sigma = detail::scalar_or<bool>(f, "fit_gaussian_sigma", fctx, spec.fit_gaussian_sigma);
    spec.max_evaluations = detail::scalar_or<int>(f, "max_evaluations", fctx, spec.max_evaluations);
    spec.tolerance = detail::scalar_or<double>(f, "tolerance", fctx, spec.tolerance);
    c.fit.widths_from_model = detail::scalar_or<bool>(f, "widths_from_model", fctx, c.fit.widths_from_model);
    if (const YAML::Node b = f["bounds"]) {
      for (const auto& kv : b) {
        const std::string key = kv.first.as<std::string>();
        spec.bounds[key] = parse_bounds(kv.second, key, fctx + ".bounds");
      }
    }
    if (const YAML::Node g = f["initial_guess"]) {
      const std::string gctx = fctx + ".initial_guess";
      fit::FitParameters p;
      p.baseline = detail::scalar_or<double>(g, "baseline", gctx, p.baseline);
      p.centers = quantity_list(g, "centers", Dimension::kFrequency, gctx);
      if (const YAML::Node d = g["depths"]) {
        for (std::size_t i = 0; i < d.size(); ++i) p.depths.push_back(d[i].as<double>());
      }
      p.tau0 = detail::quantity_or(g, "tau0", Dimension::kTime, gctx, p.tau0);
      p.lorentzian_width = detail::quantity_or(g, "lorentzian_width", Dimension::kFrequency, gctx, 0.0);
      p.gaussian_sigma = detail::quantity_or(g, "gaussian_sigma", Dimension::kFrequency, gctx, 0.0);
      spec.initial_guess = p;
    }
    try {
      spec.validate();
    } catch (const Error& e) {
      throw ConfigError(fctx + ": " + e.what());
    }
  }

  if (const YAML::Node io = root["io"]) {
    const std::string ictx = ctx + ".io";
    if (io["output_dir"]) c.io.output_dir = relative_to(c.source, detail::scalar<std::string>(io, "output_dir", ictx));
    c.io.stem = detail::scalar_or<std::string>(io, "stem", ictx, c.io.stem);
    if (io["input"]) {
      c.io.input = relative_to(c.source, detail::scalar<std::string>(io, "input", ictx));
      if (!std::filesystem::exists(*c.io.input)) {
        throw ConfigError(ictx + ".input: file not found: " + c.io.input->string());
      }
    }
  }
}

}  // namespace

std::filesystem::path default_constants_path() { return TAPERTPA_DEFAULT_CONSTANTS; }

RunConfig default_run_config() {
  RunConfig c;
  c.constants_path = resolve_constants_path(default_constants_path());
  apply_constants(c);
  finish_defaults(c);
  return c;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw ConfigError("config file not found: " + path.string());
  YAML::Node root;
  try {
    root = YAML::LoadFile(path.string());
  } catch (const YAML::Exception& e) {
    throw ConfigError("config " + path.string() + ": " + e.what());
  }
  if (!root.IsMap()) throw ConfigError("config " + path.string() + ": top level must be a mapping");
  RunConfig c;
  c.source = path;
  const std::string ctx = path.filename().string();
  std::filesystem::path constants = default_constants_path();
  if (root["constants"]) constants = relative_to(path, detail::scalar<std::string>(root, "constants", ctx));
  c.constants_path = resolve_constants_path(constants);
  apply_constants(c);
  // Vapor temperature feeds the default transit model, so it is read first.
  if (const YAML::Node v = root["vapor"]) {
    c.vapor.temperature =
        detail::quantity_or(v, "temperature", Dimension::kTemperature, ctx + ".vapor", c.vapor.temperature);
  }
  finish_defaults(c);
  parse_body(c, root, ctx);
  return c;
}

mc::McConfig make_mc_config(const RunConfig& c) {
  double xi = 0.0;
  if (c.mc.decay_length_xi) {
    xi = *c.mc.decay_length_xi;
  } else {
    const double wl = c.mc.wavelength.value_or(c.two_photon.lambda1);
    xi = optics::solve_he11(c.fiber, wl).decay_length_xi;
  }
  auto m = mc::McConfig::make(c.fiber.radius(), xi, c.vapor.temperature, c.two_photon.broadening.mass);
  m.n_trajectories = c.mc.n_trajectories;
  m.seed = c.seed;
  if (c.mc.outer_cutoff) m.outer_cutoff = *c.mc.outer_cutoff;
  if (c.mc.time_step) m.time_step = *c.mc.time_step;
  if (c.mc.grid) m.grid = *c.mc.grid;
  if (c.mc.fixed_speed) {
    m.fixed_speed = c.mc.fixed_speed;
    if (!c.mc.time_step) m.time_step = std::min(m.time_step, xi / (20.0 * *c.mc.fixed_speed));
  }
  m.threads = c.mc.threads;
  return m;
}

fit::FitModelSpec make_fit_spec(const RunConfig& c) {
  fit::FitModelSpec spec = c.fit.spec;
  if (c.fit.widths_from_model) {
    const auto w = lineshape::dip_widths(c.two_photon);
    spec.fixed_widths = fit::FixedWidths{w.lorentzian_hwhm, w.gaussian_sigma};
  }
  return spec;
}

nlohmann::json to_json(const RunConfig& c) {
  return {
      {"source", c.source.string()},
      {"constants_path", c.constants_path.string()},
      {"constants_version", c.constants.version},
      {"seed", c.seed},
      {"fiber",
       {{"diameter_m", c.fiber.diameter},
        {"length_m", c.fiber.length},
        {"cladding_index", c.fiber.cladding_index},
        {"core_material", c.fiber.core_index_model.name()}}},
      {"vapor",
       {{"temperature_k", c.vapor.temperature},
        {"optical_depth_scale", c.vapor.optical_depth_scale},
        {"speed_convention", vapor::to_string(c.vapor.speed_convention)}}},
  };
}

}  // namespace tpa
