#include <benchmark/benchmark.h>

#include "tapertpa/constants.hpp"
#include "tapertpa/fitting.hpp"
#include "tapertpa/lineshape.hpp"
#include "tapertpa/transit_mc.hpp"
#include "tapertpa/wave_optics.hpp"

namespace {

using namespace tpa;

const AtomicConstants& constants() {
  static const AtomicConstants c = load_constants(TAPERTPA_BENCH_CONSTANTS);
  return c;
}

optics::FiberSpec fiber(double d) {
  optics::FiberSpec f;
  f.diameter = d;
  f.core_index_model = constants().core_material;
  return f;
}

lineshape::TwoPhotonModel paper_model() {
  lineshape::TwoPhotonModel m;
  m.transit = vapor::TransitModel::from_tau0(2.05e-9, 270.0);
  m.dips = {{0.0, 0.0, 0.3}};
  m.grid = {-500e6, 500e6, 0.1e6};
  return m;
}

void BM_SolveHe11(benchmark::State& state) {
  const auto f = fiber(350e-9);
  for (auto _ : state) benchmark::DoNotOptimize(optics::solve_he11(f, 780e-9));
}
BENCHMARK(BM_SolveHe11)->Unit(benchmark::kMillisecond);

void BM_SynthesizeTwoPhoton(benchmark::State& state) {
  const auto m = paper_model();
  for (auto _ : state) benchmark::DoNotOptimize(lineshape::synthesize_two_photon(m));
}
BENCHMARK(BM_SynthesizeTwoPhoton)->Unit(benchmark::kMillisecond);

void BM_FitCusp(benchmark::State& state) {
  const auto m = paper_model();
  const auto data = lineshape::synthesize_two_photon(m);
  const auto w = lineshape::dip_widths(m);
  fit::FitModelSpec spec;
  spec.fixed_widths = fit::FixedWidths{w.lorentzian_hwhm, w.gaussian_sigma};
  for (auto _ : state) benchmark::DoNotOptimize(fit::fit_cusp(data, spec));
}
BENCHMARK(BM_FitCusp)->Unit(benchmark::kMillisecond);

void BM_McTrajectory(benchmark::State& state) {
  const auto cfg = mc::McConfig::make(175e-9, 271e-9, 373.15, 1.409993199e-25);
  std::uint64_t i = 0;
  for (auto _ : state) {
    auto rng = mc::trajectory_stream(1, i++);
    benchmark::DoNotOptimize(mc::trajectory_spectrum(mc::sample_trajectory(rng, cfg), cfg));
  }
}
BENCHMARK(BM_McTrajectory)->Unit(benchmark::kMicrosecond);

}  // namespace
BENCHMARK_MAIN();
