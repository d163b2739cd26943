#include "tapertpa/transit_mc.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <thread>

#include "tapertpa/error.hpp"
#include "tapertpa/fitting.hpp"
#include "tapertpa/physical_constants.hpp"
#include "tapertpa/vapor.hpp"

namespace tpa::mc {

namespace {

constexpr std::uint64_t kBlockSize = 1024;
constexpr int kDefaultGridSteps = 800;

double most_probable(const McConfig& c) { return vapor::thermal_speed(c.temperature, c.mass); }

double speed_scale(const McConfig& c) {
  return std::max(most_probable(c), c.fixed_speed.value_or(0.0));
}

// Roots of |e + d s|^2 = r^2 with |d| = 1; false when the line misses.
bool circle_hits(Vec2 e, Vec2 d, double r, double& s1, double& s2) {
  const double b = e.x * d.x + e.y * d.y;
  const double c = e.x * e.x + e.y * e.y - r * r;
  const double disc = b * b - c;
  if (disc <= 0.0) return false;
  const double q = std::sqrt(disc);
  s1 = -b - q;
  s2 = -b + q;
  return true;
}

}  // namespace

McConfig McConfig::make(double fiber_radius, double xi, double temperature, double mass) {
  McConfig c;
  c.fiber_radius = fiber_radius;
  c.decay_length_xi = xi;
  c.outer_cutoff = 5.0 * xi;
  c.temperature = temperature;
  c.mass = mass;
  const double vmp = vapor::thermal_speed(temperature, mass);
  if (!(vmp > 0.0) || !(xi > 0.0)) throw InputError("MC defaults need xi > 0 and temperature > 0");
  c.time_step = xi / (20.0 * vmp);
  const double tau_est = xi / vmp;
  const double half = 8.0 / (2.0 * phys::kPi * tau_est);
  c.grid.min = -half;
  c.grid.max = half;
  c.grid.step = 2.0 * half / kDefaultGridSteps;
  return c;
}

void McConfig::validate() const {
  if (n_trajectories < 1) throw InputError("n_trajectories must be >= 1");
  if (!(decay_length_xi > 0.0)) throw InputError("decay_length_xi must be > 0");
  if (!(fiber_radius >= 0.0)) throw InputError("fiber_radius must be >= 0");
  if (!(outer_cutoff > 0.0)) throw InputError("outer_cutoff must be > 0");
  if (!(mass > 0.0)) throw InputError("mass must be > 0");
  if (fixed_speed) {
    if (!(*fixed_speed > 0.0)) throw InputError("fixed_speed must be > 0");
    if (!(temperature >= 0.0)) throw InputError("temperature must be >= 0");
  } else if (!(temperature > 0.0)) {
    throw InputError("temperature must be > 0");
  }
  const double limit = decay_length_xi / (20.0 * speed_scale(*this));
  if (!(time_step > 0.0) || time_step > limit * (1.0 + 1e-12)) {
    throw InputError("time_step must be in (0, xi/(20 v)] = (0, " + std::to_string(limit) + " s]");
  }
  grid.validate();
}

std::mt19937_64 trajectory_stream(std::uint64_t seed, std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
  return std::mt19937_64(seq);
}

Trajectory sample_trajectory(std::mt19937_64& rng, const McConfig& config) {
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  const double phi = 2.0 * phys::kPi * uniform(rng);
  const Vec2 normal{std::cos(phi), std::sin(phi)};
  const Vec2 tangent{-normal.y, normal.x};
  const double r = config.shell_radius();
  // Cosine-weighted angle from the inward normal.
  const double sin_t = 2.0 * uniform(rng) - 1.0;
  const double cos_t = std::sqrt(std::max(0.0, 1.0 - sin_t * sin_t));
  Trajectory t;
  t.entry = {r * normal.x, r * normal.y};
  t.direction = {-cos_t * normal.x + sin_t * tangent.x, -cos_t * normal.y + sin_t * tangent.y};
  if (config.fixed_speed) {
    t.speed = *config.fixed_speed;
  } else {
    std::normal_distribution<double> gauss(0.0, 1.0);
    const double g1 = gauss(rng), g2 = gauss(rng), g3 = gauss(rng);
    t.speed = vapor::velocity_sigma(config.temperature, config.mass) * std::sqrt(g1 * g1 + g2 * g2 + g3 * g3);
  }
  return t;
}

double flux_mean_speed(double temperature, double mass) {
  return 2.0 * vapor::thermal_speed(temperature, mass) / std::sqrt(phys::kPi);
}

std::vector<double> envelope_spectrum(std::span<const double> envelope, double dt,
                                      const EndDerivatives& start, const EndDerivatives& end,
                                      std::span<const double> frequencies) {
  const std::size_t m = frequencies.size();
  std::vector<double> out(m, 0.0);
  if (envelope.empty()) return out;
  const std::size_t n = envelope.size();
  std::vector<double> zr(m, 1.0), zi(m, 0.0), rr(m), ri(m), ar(m, 0.0), ai(m, 0.0), w(m);
  for (std::size_t j = 0; j < m; ++j) {
    w[j] = 2.0 * phys::kPi * frequencies[j];
    rr[j] = std::cos(w[j] * dt);
    ri[j] = std::sin(w[j] * dt);
  }
  for (std::size_t k = 0; k < n; ++k) {
    const double f = (k == 0 || k + 1 == n) && n > 1 ? 0.5 * envelope[k] : envelope[k];
    const bool last = k + 1 == n;
    for (std::size_t j = 0; j < m; ++j) {
      ar[j] += f * zr[j];
      ai[j] += f * zi[j];
    }
    if (last) break;
    for (std::size_t j = 0; j < m; ++j) {
      const double nr = zr[j] * rr[j] - zi[j] * ri[j];
      const double ni = zr[j] * ri[j] + zi[j] * rr[j];
      zr[j] = nr;
      zi[j] = ni;
    }
  }
  const double fa = envelope.front(), fb = envelope.back();
  const double c2 = dt * dt / 12.0;
  const double c4 = dt * dt * dt * dt / 720.0;
  // g = f e^{iwt}: g' = (f' + i w f) e^{iwt},
  // g''' = (f''' - 3 w^2 f' + i (3 w f'' - w^3 f)) e^{iwt}; the phase is 1 at t = 0.
  for (std::size_t j = 0; j < m; ++j) {
    const double wj = w[j], w2 = wj * wj;
    const double g1ar = start.d1, g1ai = wj * fa;
    const double g1br0 = end.d1, g1bi0 = wj * fb;
    const double g3ar = start.d3 - 3.0 * w2 * start.d1, g3ai = 3.0 * wj * start.d2 - w2 * wj * fa;
    const double g3br0 = end.d3 - 3.0 * w2 * end.d1, g3bi0 = 3.0 * wj * end.d2 - w2 * wj * fb;
    const double g1br = g1br0 * zr[j] - g1bi0 * zi[j], g1bi = g1br0 * zi[j] + g1bi0 * zr[j];
    const double g3br = g3br0 * zr[j] - g3bi0 * zi[j], g3bi = g3br0 * zi[j] + g3bi0 * zr[j];
    const double re = dt * ar[j] - c2 * (g1br - g1ar) + c4 * (g3br - g3ar);
    const double im = dt * ai[j] - c2 * (g1bi - g1ai) + c4 * (g3bi - g3ai);
    out[j] = re * re + im * im;
  }
  return out;
}

TrajectoryResponse trajectory_spectrum(const Trajectory& tr, const McConfig& config) {
  const auto freqs = config.grid.points();
  TrajectoryResponse resp;
  resp.spectrum.assign(freqs.size(), 0.0);
  double s1 = 0.0, s2 = 0.0;
  if (!circle_hits(tr.entry, tr.direction, config.shell_radius(), s1, s2)) return resp;
  const double start = std::max(0.0, s1);
  double end = s2;
  if (!(end > start) || !(tr.speed > 0.0)) return resp;
  double f1 = 0.0, f2 = 0.0;
  if (config.fiber_radius > 0.0 && circle_hits(tr.entry, tr.direction, config.fiber_radius, f1, f2) &&
      f1 > start && f1 < end) {
    end = f1;
  }
  resp.entered = true;
  const double duration = (end - start) / tr.speed;
  resp.path_time = duration;
  const auto nsteps = static_cast<std::size_t>(std::max(1.0, std::ceil(duration / config.time_step)));
  const double h = duration / static_cast<double>(nsteps);
  const double xi = config.decay_length_xi;
  std::vector<double> env(nsteps + 1);
  auto position = [&](double t) {
    const double s = start + tr.speed * t;
    return Vec2{tr.entry.x + tr.direction.x * s, tr.entry.y + tr.direction.y * s};
  };
  auto envelope_at = [&](Vec2 p) {
    return std::exp(-(std::hypot(p.x, p.y) - config.fiber_radius) / xi);
  };
  for (std::size_t k = 0; k <= nsteps; ++k) env[k] = envelope_at(position(h * static_cast<double>(k)));
  // Along the line r'' = v^2 b^2 / r^3 with b the impact parameter.
  const double b2 = [&] {
    const double pd = tr.entry.x * tr.direction.x + tr.entry.y * tr.direction.y;
    return std::max(0.0, tr.entry.x * tr.entry.x + tr.entry.y * tr.entry.y - pd * pd);
  }();
  auto derivatives = [&](double t, double f) {
    const Vec2 p = position(t);
    const double r = std::hypot(p.x, p.y);
    const double v = tr.speed;
    const double r1 = (p.x * tr.direction.x + p.y * tr.direction.y) * v / r;
    const double r2 = v * v * b2 / (r * r * r);
    const double r3 = -3.0 * r2 * r1 / r;
    EndDerivatives d;
    d.d1 = -f * r1 / xi;
    d.d2 = f * (r1 * r1 / (xi * xi) - r2 / xi);
    d.d3 = d.d1 * (r1 * r1 / (xi * xi) - r2 / xi) + f * (2.0 * r1 * r2 / (xi * xi) - r3 / xi);
    return d;
  };
  const EndDerivatives da = derivatives(0.0, env.front());
  const EndDerivatives db = derivatives(duration, env.back());
  double integral = 0.0;
  for (std::size_t k = 0; k <= nsteps; ++k) {
    integral += (k == 0 || k == nsteps) ? 0.5 * env[k] : env[k];
  }
  resp.interaction_time = integral * h - h * h / 12.0 * (db.d1 - da.d1) +
                          h * h * h * h / 720.0 * (db.d3 - da.d3);

  const bool mirror = config.grid.symmetric();
  if (mirror) {
    const std::size_t mid = freqs.size() / 2;
    const std::span<const double> upper(freqs.data() + mid, freqs.size() - mid);
    const auto half = envelope_spectrum(env, h, da, db, upper);
    for (std::size_t j = 0; j < half.size(); ++j) {
      resp.spectrum[mid + j] = half[j];
      resp.spectrum[mid - j] = half[j];
    }
  } else {
    resp.spectrum = envelope_spectrum(env, h, da, db, freqs);
  }
  return resp;
}

McResult mc_lineshape(const McConfig& config) {
  config.validate();
  const std::size_t m = config.grid.size();
  const std::uint64_t n = config.n_trajectories;
  const std::uint64_t n_blocks = (n + kBlockSize - 1) / kBlockSize;
  struct Block {
    std::vector<double> spectrum;
    double interaction = 0.0;
    std::uint64_t entered = 0;
  };
  std::vector<Block> blocks(n_blocks);
  std::atomic<std::uint64_t> next{0};
  auto worker = [&] {
    for (std::uint64_t b = next++; b < n_blocks; b = next++) {
      Block& blk = blocks[b];
      blk.spectrum.assign(m, 0.0);
      const std::uint64_t lo = b * kBlockSize;
      const std::uint64_t hi = std::min(n, lo + kBlockSize);
      for (std::uint64_t i = lo; i < hi; ++i) {
        auto rng = trajectory_stream(config.seed, i);
        const auto resp = trajectory_spectrum(sample_trajectory(rng, config), config);
        if (!resp.entered) continue;
        ++blk.entered;
        blk.interaction += resp.interaction_time;
        for (std::size_t j = 0; j < m; ++j) blk.spectrum[j] += resp.spectrum[j];
      }
    }
  };
  unsigned threads = config.threads ? config.threads : std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::uint64_t>(threads, n_blocks));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  }

  std::vector<double> total(m, 0.0);
  double interaction = 0.0;
  std::uint64_t entered = 0;
  for (const auto& blk : blocks) {
    for (std::size_t j = 0; j < m; ++j) total[j] += blk.spectrum[j];
    interaction += blk.interaction;
    entered += blk.entered;
  }
  if (entered == 0) throw NumericalError("degenerate ensemble: no trajectory entered the interaction shell");
  const double peak = *std::max_element(total.begin(), total.end());
  if (!(peak > 0.0)) throw NumericalError("degenerate ensemble: spectrum is identically zero");

  McResult res;
  res.n_effective = entered;
  res.mean_interaction_time = interaction / static_cast<double>(entered);
  res.spectrum.detuning = config.grid.points();
  res.spectrum.transmission.resize(m);
  for (std::size_t j = 0; j < m; ++j) res.spectrum.transmission[j] = total[j] / peak;

  SpectrumData dip;
  dip.detuning = res.spectrum.detuning;
  dip.transmission.resize(m);
  for (std::size_t j = 0; j < m; ++j) dip.transmission[j] = 1.0 - 0.5 * res.spectrum.transmission[j];
  const auto fit = fit::fit_cusp(dip, fit::FitModelSpec{});
  res.fitted_tau0 = fit.parameters.tau0;
  res.fit_converged = fit.converged;

  res.spectrum.metadata = {
      {"kind", "mc"},
      {"seed", config.seed},
      {"n_trajectories", config.n_trajectories},
      {"n_effective", res.n_effective},
      {"mean_interaction_time_s", res.mean_interaction_time},
      {"fitted_tau0_s", res.fitted_tau0},
      {"fit_converged", res.fit_converged},
      {"fiber_radius_m", config.fiber_radius},
      {"decay_length_xi_m", config.decay_length_xi},
      {"outer_cutoff_m", config.outer_cutoff},
      {"temperature_k", config.temperature},
      {"mass_kg", config.mass},
      {"time_step_s", config.time_step},
  };
  return res;
}

}  // namespace tpa::mc
