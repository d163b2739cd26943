#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "tapertpa/error.hpp"
#include "tapertpa/physical_constants.hpp"
#include "tapertpa/vapor.hpp"
#include "test_support.hpp"

namespace tpa::vapor {
namespace {

VaporConditions default_mixture() {
  VaporConditions v;
  v.isotopes = testing::rubidium().isotopes;
  return v;
}

TEST(ThermalSpeed, Rb85At373K) {
  EXPECT_NEAR(thermal_speed(373.15, 1.4100e-25), 270.0, 1.0);
}

TEST(ThermalSpeed, ScalesAsSqrtTemperature) {
  const double m = testing::rb85_mass();
  EXPECT_NEAR(thermal_speed(4 * 300.0, m), 2 * thermal_speed(300.0, m), 1e-12);
  EXPECT_EQ(thermal_speed(0.0, m), 0.0);
}

TEST(ThermalSpeed, ConventionsAreOrdered) {
  const double m = testing::rb85_mass();
  const double mp = thermal_speed(373.15, m, SpeedConvention::kMostProbable);
  const double mean = thermal_speed(373.15, m, SpeedConvention::kMean);
  const double rms = thermal_speed(373.15, m, SpeedConvention::kRms);
  EXPECT_LT(mp, mean);
  EXPECT_LT(mean, rms);
  EXPECT_EQ(parse_speed_convention("rms"), SpeedConvention::kRms);
  EXPECT_THROW(parse_speed_convention("fastest"), Error);
}

TEST(DopplerFwhm, D2LineRb85At373K) {
  const double nu0 = phys::kSpeedOfLight / 780.24e-9;
  EXPECT_NEAR(doppler_fwhm(nu0, 373.15, testing::rb85_mass()) / 1e6, 577.0, 1.5);
}

TEST(DopplerFwhm, LimitsAndScaling) {
  const double m = testing::rb85_mass();
  EXPECT_EQ(doppler_fwhm(3.8e14, 0.0, m), 0.0);
  EXPECT_NEAR(doppler_fwhm(2 * 3.8e14, 300.0, m), 2 * doppler_fwhm(3.8e14, 300.0, m), 1e-6);
}

TEST(DopplerFwhm, SquareIsLinearInTemperature) {
  const double m = testing::rb85_mass();
  const double nu = 3.84e14;
  const double f1 = std::pow(doppler_fwhm(nu, 300.0, m), 2);
  const double f2 = std::pow(doppler_fwhm(nu, 350.0, m), 2);
  const double f3 = std::pow(doppler_fwhm(nu, 400.0, m), 2);
  EXPECT_NEAR((f3 - f2) / (f2 - f1), 1.0, 1e-12);
  EXPECT_NEAR(f1 / 300.0, f3 / 400.0, 1e-12 * f1 / 300.0);
}

TEST(TransitTime, PaperRoundTrip) {
  EXPECT_NEAR(transit_time(554e-9, 270.0), 2.05e-9, 0.005e-9);
  EXPECT_EQ(transit_time(0.0, 270.0), 0.0);
  EXPECT_DOUBLE_EQ(transit_time(2 * 554e-9, 270.0), 2 * transit_time(554e-9, 270.0));
  EXPECT_THROW(transit_time(554e-9, 0.0), DomainError);
}

TEST(TransitTime, ExactRatioProperty) {
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> a(1e-9, 1e-5), v(1.0, 1e4);
  for (int i = 0; i < 1000; ++i) {
    const double ai = a(rng), vi = v(rng);
    EXPECT_EQ(transit_time(ai, vi), ai / vi);
    const auto t = TransitModel::from_extent(ai, vi);
    EXPECT_EQ(t.tau0, t.interaction_extent_a / t.thermal_speed_vth);
  }
}

TEST(LineList, SingleIsotopeGivesTwoLinesSplitByS) {
  VaporConditions v;
  auto iso = testing::rubidium().isotopes[0];
  iso.abundance = 1.0;
  v.isotopes = {iso};
  const auto lines = line_list(v, iso.d2_centroid_frequency);
  ASSERT_EQ(lines.size(), 2u);
  EXPECT_NEAR(lines[1].offset - lines[0].offset, iso.ground_hyperfine_splitting, 1e-3);
}

TEST(LineList, DefaultMixtureOrderingAndSpacing) {
  const auto v = default_mixture();
  const auto& c = testing::rubidium();
  const auto lines = line_list(v, c.reference_line);
  ASSERT_EQ(lines.size(), 4u);
  // Outermost pair belongs to 87Rb.
  EXPECT_EQ(lines.front().isotope, "Rb87");
  EXPECT_EQ(lines.back().isotope, "Rb87");
  EXPECT_EQ(lines[1].isotope, "Rb85");
  EXPECT_EQ(lines[2].isotope, "Rb85");
  // Offsets are differences of ~384 THz absolutes, resolved to ~0.1 Hz.
  EXPECT_NEAR(lines[3].offset - lines[0].offset, 6.834682610904e9, 0.1);
  EXPECT_NEAR(lines[2].offset - lines[1].offset, 3.0357324390e9, 0.1);
}

TEST(LineList, WeightsNonNegativeAndSumToScale) {
  auto v = default_mixture();
  v.optical_depth_scale = 2.5;
  double sum = 0.0;
  for (const auto& l : line_list(v, 0.0)) {
    EXPECT_GE(l.weight, 0.0);
    sum += l.weight;
  }
  EXPECT_NEAR(sum, 2.5, 1e-12);
}

TEST(LineList, ZeroAbundanceCarriesZeroWeight) {
  auto v = default_mixture();
  v.isotopes[0].abundance = 1.0;
  v.isotopes[1].abundance = 0.0;
  for (const auto& l : line_list(v, 0.0)) {
    if (l.isotope == "Rb87") {
      EXPECT_EQ(l.weight, 0.0);
    }
  }
}

TEST(LineList, EmptyIsotopeListIsAnError) {
  EXPECT_THROW(line_list(VaporConditions{}, 0.0), InputError);
}

TEST(VaporConditions, AbundancesMustSumToOne) {
  auto v = default_mixture();
  EXPECT_NO_THROW(v.validate());
  v.isotopes[0].abundance += 1e-6;
  EXPECT_THROW(v.validate(), InputError);
}

}  // namespace
}  // namespace tpa::vapor
