#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "tapertpa/spectrum.hpp"

namespace tpa::mc {

/// Geometry constant in fitted_tau0 = kappa xi / v_mp, calibrated once from a
/// 4e5-trajectory run (seed 12345, xi = 271 nm, R = 175 nm, 373.15 K, 85Rb)
/// and frozen as the regression baseline.
inline constexpr double kGeometryKappa = 2.79;

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

struct McConfig {
  std::uint64_t n_trajectories = 100000;
  std::uint64_t seed = 1;
  double fiber_radius = 175e-9;     // m
  double decay_length_xi = 0.0;     // m
  double outer_cutoff = 0.0;        // m beyond the fiber surface; 5 xi when built by make()
  double temperature = 373.15;      // K
  double mass = 1.409993199e-25;    // kg
  double time_step = 0.0;           // s
  DetuningGrid grid;
  std::optional<double> fixed_speed;  // replaces the thermal speed draw when set
  unsigned threads = 0;               // 0 = hardware concurrency

  /// Defaults derived from xi and the most-probable speed: cutoff 5 xi,
  /// time step xi / (20 v_mp), grid +-8/(2 pi tau_est) in 800 steps with
  /// tau_est = xi / v_mp.
  static McConfig make(double fiber_radius, double xi, double temperature, double mass);

  /// Throws InputError; enforces time_step <= xi / (20 v_mp).
  void validate() const;
  [[nodiscard]] double shell_radius() const { return fiber_radius + outer_cutoff; }
};

/// Straight line in the fiber cross-section.
struct Trajectory {
  Vec2 entry;
  Vec2 direction;  // unit vector
  double speed = 0.0;
};

/// Independent stream for trajectory `index`; the same (seed, index) always
/// yields the same stream regardless of how trajectories are scheduled.
std::mt19937_64 trajectory_stream(std::uint64_t seed, std::uint64_t index);

/// Entry uniform on the shell circle, cosine-weighted inward direction, speed
/// from the 2-D flux-weighted Maxwell distribution p(v) ~ v^2 exp(-v^2/v_mp^2).
Trajectory sample_trajectory(std::mt19937_64& rng, const McConfig& config);

/// Mean of the flux-weighted 2-D speed distribution, 2 v_mp / sqrt(pi).
double flux_mean_speed(double temperature, double mass);

/// First three time derivatives of an envelope at one end of its interval.
struct EndDerivatives {
  double d1 = 0.0;
  double d2 = 0.0;
  double d3 = 0.0;
};

/// |int f(t) exp(i 2 pi nu t) dt|^2 for a uniformly sampled envelope `f`,
/// trapezoidal rule with the h^2 and h^4 Euler-Maclaurin end corrections
/// built from the envelope derivatives at the two ends.
std::vector<double> envelope_spectrum(std::span<const double> envelope, double dt,
                                      const EndDerivatives& start, const EndDerivatives& end,
                                      std::span<const double> frequencies);

struct TrajectoryResponse {
  std::vector<double> spectrum;  // over the config grid
  double interaction_time = 0.0;  // int f dt
  double path_time = 0.0;         // time spent inside the shell
  bool entered = false;
};

/// Weak-field spectrum of one trajectory with envelope exp(-s(t)/xi), s the
/// distance to the fiber surface; the path ends at the shell or the fiber.
TrajectoryResponse trajectory_spectrum(const Trajectory& trajectory, const McConfig& config);

struct McResult {
  SpectrumData spectrum;  // unit peak; transmission column holds the line shape
  std::uint64_t n_effective = 0;
  double mean_interaction_time = 0.0;
  double fitted_tau0 = 0.0;
  bool fit_converged = false;
};

/// Trajectory-averaged line shape and its cusp fit. Bit-identical for a given
/// (config, seed) independent of the thread count.
McResult mc_lineshape(const McConfig& config);

}  // namespace tpa::mc
