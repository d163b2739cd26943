#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "tapertpa/error.hpp"
#include "tapertpa/transit_mc.hpp"
#include "tapertpa/vapor.hpp"
#include "test_support.hpp"

namespace tpa::mc {
namespace {

constexpr double kRadius = 175e-9;
constexpr double kTemperature = 373.15;

McConfig config_for(double xi, std::uint64_t n, std::uint64_t seed = 12345) {
  McConfig c = McConfig::make(kRadius, xi, kTemperature, testing::rb85_mass());
  c.n_trajectories = n;
  c.seed = seed;
  return c;
}

double vmp() { return vapor::thermal_speed(kTemperature, testing::rb85_mass()); }

// Normalized fourth moment minus three of a non-negative curve over its grid.
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

double half_max_width(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t k = testing::argmax(y);
  const double half = 0.5 * y[k];
  std::size_t r = k;
  while (r + 1 < y.size() && y[r + 1] > half) ++r;
  const double xr = x[r] + (y[r] - half) / (y[r] - y[r + 1]) * (x[r + 1] - x[r]);
  return 2.0 * (xr - x[k]);
}

TEST(SampleTrajectory, FixedSpeedAtZeroTemperature) {
  McConfig c = config_for(271e-9, 1);
  c.temperature = 0.0;
  c.fixed_speed = 300.0;
  c.time_step = c.decay_length_xi / (20 * 300.0);
  c.validate();
  auto rng = trajectory_stream(1, 0);
  for (int i = 0; i < 1000; ++i) EXPECT_EQ(sample_trajectory(rng, c).speed, 300.0);
}

TEST(SampleTrajectory, FluxMaxwellMeanWithinThreeSigma) {
  const McConfig c = config_for(271e-9, 1);
  const int n = 100000;
  double sum = 0.0, sum2 = 0.0;
  for (int i = 0; i < n; ++i) {
    auto rng = trajectory_stream(42, static_cast<std::uint64_t>(i));
    const double v = sample_trajectory(rng, c).speed;
    sum += v;
    sum2 += v * v;
  }
  const double mean = sum / n;
  const double sd = std::sqrt(sum2 / n - mean * mean);
  EXPECT_NEAR(mean, flux_mean_speed(kTemperature, testing::rb85_mass()), 3 * sd / std::sqrt(n));
}

TEST(SampleTrajectory, EntersShellHeadingInward) {
  const McConfig c = config_for(271e-9, 1);
  for (std::uint64_t i = 0; i < 1000; ++i) {
    auto rng = trajectory_stream(5, i);
    const auto t = sample_trajectory(rng, c);
    EXPECT_NEAR(std::hypot(t.entry.x, t.entry.y), c.shell_radius(), 1e-15);
    EXPECT_NEAR(std::hypot(t.direction.x, t.direction.y), 1.0, 1e-12);
    EXPECT_LE(t.entry.x * t.direction.x + t.entry.y * t.direction.y, 0.0);
  }
}

TEST(TrajectoryStream, SameSeedAndIndexSameSequence) {
  auto a = trajectory_stream(99, 1234);
  auto b = trajectory_stream(99, 1234);
  auto c = trajectory_stream(99, 1235);
  const auto x = a();
  EXPECT_EQ(x, b());
  EXPECT_NE(x, c());
}

TEST(TrajectorySpectrum, LineMissingTheShellGivesZero) {
  const McConfig c = config_for(271e-9, 1);
  const double rs = c.shell_radius();
  const Trajectory miss{{rs * 1.001, -rs}, {0.0, 1.0}, vmp()};
  const Trajectory graze{{rs * 0.999, -rs}, {0.0, 1.0}, vmp()};
  const auto a = trajectory_spectrum(miss, c);
  const auto b = trajectory_spectrum(graze, c);
  EXPECT_FALSE(a.entered);
  EXPECT_TRUE(b.entered);
  const double ref = *std::max_element(b.spectrum.begin(), b.spectrum.end());
  ASSERT_GT(ref, 0.0);
  for (double s : a.spectrum) EXPECT_LT(s, 1e-10 * ref);
}

TEST(EnvelopeSpectrum, RectangularEnvelopeIsSinc) {
  const double tau = 1e-9;
  const int n = 2000;
  const std::vector<double> env(n + 1, 1.0);
  std::vector<double> nu;
  for (int j = -200; j <= 200; ++j) nu.push_back(j * 25e6);
  const auto s = envelope_spectrum(env, tau / n, {}, {}, nu);
  for (std::size_t j = 0; j < nu.size(); ++j) {
    const double half_phase = std::numbers::pi * nu[j] * tau;
    const double sinc = half_phase == 0.0 ? 1.0 : std::sin(half_phase) / half_phase;
    EXPECT_NEAR(s[j] / (tau * tau), sinc * sinc, 1e-6) << nu[j];
  }
}

TEST(TrajectorySpectrum, HalvingTimeStepConverges) {
  McConfig c = config_for(271e-9, 1);
  for (std::uint64_t i = 0; i < 20; ++i) {
    auto rng = trajectory_stream(7, i);
    const auto t = sample_trajectory(rng, c);
    McConfig fine = c;
    fine.time_step = 0.5 * c.time_step;
    const auto a = trajectory_spectrum(t, c);
    const auto b = trajectory_spectrum(t, fine);
    const double peak = *std::max_element(b.spectrum.begin(), b.spectrum.end());
    double ss = 0.0;
    for (std::size_t j = 0; j < a.spectrum.size(); ++j) {
      const double d = (a.spectrum[j] - b.spectrum[j]) / peak;
      ss += d * d;
    }
    EXPECT_LT(std::sqrt(ss / static_cast<double>(a.spectrum.size())), 1e-6) << "trajectory " << i;
  }
}

TEST(McConfig, RejectsCoarseTimeStepAndEmptyRuns) {
  McConfig c = config_for(271e-9, 10);
  c.time_step *= 1.01;
  EXPECT_THROW(c.validate(), InputError);
  c = config_for(271e-9, 0);
  EXPECT_THROW(c.validate(), InputError);
}

TEST(McLineshape, IdenticalAcrossThreadCounts) {
  McConfig c = config_for(271e-9, 5000, 321);
  c.threads = 1;
  const auto a = mc_lineshape(c);
  c.threads = 3;
  const auto b = mc_lineshape(c);
  EXPECT_EQ(a.spectrum.transmission, b.spectrum.transmission);
  EXPECT_EQ(a.fitted_tau0, b.fitted_tau0);
  EXPECT_EQ(a.mean_interaction_time, b.mean_interaction_time);
  c.seed = 322;
  EXPECT_NE(mc_lineshape(c).spectrum.transmission, a.spectrum.transmission);
}

TEST(McLineshape, FixedSpeedEnsemble) {
  McConfig c = config_for(271e-9, 2000);
  c.fixed_speed = vmp();
  const auto r = mc_lineshape(c);
  EXPECT_EQ(r.n_effective, 2000u);
  EXPECT_GT(r.mean_interaction_time, 0.0);
  EXPECT_GT(r.fitted_tau0, 0.0);
}

// One high-statistics run checks every ensemble property at xi = 271 nm.
TEST(McLineshape, HighStatisticsEnsembleProperties) {
  const double xi = 271e-9;
  const auto r = mc_lineshape(config_for(xi, 100000));
  const auto& x = r.spectrum.detuning;
  const auto& y = r.spectrum.transmission;
  const std::size_t n = y.size();

  EXPECT_EQ(r.n_effective, 100000u);
  EXPECT_GT(r.mean_interaction_time, 0.0);
  EXPECT_NEAR(y[testing::argmax(y)], 1.0, 1e-9);
  std::size_t nearest_zero = 0;
  for (std::size_t i = 1; i < n; ++i) {
    if (std::abs(x[i]) < std::abs(x[nearest_zero])) nearest_zero = i;
  }
  EXPECT_EQ(testing::argmax(y), nearest_zero);
  for (std::size_t i = 0; i < n; ++i) EXPECT_NEAR(y[i], y[n - 1 - i], 1e-12);

  std::vector<double> smooth(n);
  for (std::size_t i = 2; i + 2 < n; ++i) {
    smooth[i] = (y[i - 2] + y[i - 1] + y[i] + y[i + 1] + y[i + 2]) / 5.0;
  }
  for (std::size_t i = n / 2 + 1; i + 2 < n; ++i) EXPECT_LE(smooth[i], smooth[i - 1]) << x[i];

  const double sigma = half_max_width(x, y) / (2 * std::sqrt(2 * std::log(2.0)));
  std::vector<double> gauss(n);
  for (std::size_t i = 0; i < n; ++i) gauss[i] = std::exp(-0.5 * x[i] * x[i] / (sigma * sigma));
  EXPECT_GT(excess_kurtosis(x, y) - excess_kurtosis(x, gauss), 0.0);

  ASSERT_TRUE(r.fit_converged);
  EXPECT_NEAR(r.fitted_tau0, kGeometryKappa * xi / vmp(), 0.3 * kGeometryKappa * xi / vmp());
}

TEST(McLineshape, FittedTau0LinearInDecayLength) {
  const auto a = mc_lineshape(config_for(271e-9, 100000));
  const auto b = mc_lineshape(config_for(542e-9, 100000));
  ASSERT_TRUE(a.fit_converged && b.fit_converged);
  EXPECT_NEAR(b.fitted_tau0 / a.fitted_tau0, 2.0, 0.1);
}

}  // namespace
}  // namespace tpa::mc
