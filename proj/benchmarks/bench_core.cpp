// Microbenchmarks for the hot paths: Hamiltonian diagonalization, the two
// laser propagators, the Ramsey readout chain, and a full rate fit.
#include <benchmark/benchmark.h>

#include <vector>

#include "nvpol/estimation.hpp"
#include "nvpol/rate_model.hpp"
#include "nvpol/readout.hpp"
#include "nvpol/register_params.hpp"
#include "nvpol/spin_model.hpp"

using namespace nvpol;

namespace {

std::vector<double> fit_grid() {
  std::vector<double> d;
  for (int i = 0; i < 40; ++i) d.push_back(3000.0 * i / 39.0);
  return d;
}

void bm_hamiltonian_eigensystem(benchmark::State& state) {
  const RegisterParams params;
  for (auto _ : state) {
    const Matrix9 h = build_hamiltonian(params);
    const Eigensystem es = eigensystem(h);
    benchmark::DoNotOptimize(es.values);
  }
}
BENCHMARK(bm_hamiltonian_eigensystem);

void bm_transition_table(benchmark::State& state) {
  const RegisterParams params;
  for (auto _ : state) {
    const TransitionTable t = transition_frequencies(params);
    benchmark::DoNotOptimize(t.entries);
  }
}
BENCHMARK(bm_transition_table);

void bm_evolve_analytic(benchmark::State& state) {
  const RateConstants r = preset_594();
  double t = 0.0;
  for (auto _ : state) {
    t += 1.0;
    if (t > 5000.0) t = 0.0;
    const PopulationVector p = evolve_analytic(r, t);
    benchmark::DoNotOptimize(p);
  }
}
BENCHMARK(bm_evolve_analytic);

void bm_evolve_numeric_5us(benchmark::State& state) {
  const RateConstants r = preset_594();
  const PopulationVector p0 = nuclear_polarized_state();
  for (auto _ : state) {
    const PopulationVector p = evolve_numeric(r, p0, 5000.0, 0.1);
    benchmark::DoNotOptimize(p);
  }
}
BENCHMARK(bm_evolve_numeric_5us);

void bm_fid_and_spectrum(benchmark::State& state) {
  const RegisterParams params;
  const RamseySettings settings;
  PopulationVector s = PopulationVector::Zero();
  s[0] = 0.1;
  s[1] = 0.1;
  s[2] = 0.7;
  for (auto _ : state) {
    const FidTrace fid = simulate_fid(s, params, settings);
    const Spectrum sp = spectrum_of_fid(fid, settings.zero_pad_factor);
    benchmark::DoNotOptimize(sp.magnitude);
  }
}
BENCHMARK(bm_fid_and_spectrum);

void bm_fit_rate_constants(benchmark::State& state) {
  const DynamicsDataset data =
      synth_dataset(preset_532(), fit_grid(), 0.01, 1, 1.0);
  for (auto _ : state) {
    const FitResult f = fit_rate_constants(data, preset_520(), false);
    benchmark::DoNotOptimize(f.rates);
  }
}
BENCHMARK(bm_fit_rate_constants);

}  // namespace

BENCHMARK_MAIN();
