// Serial reference kernels against their OpenMP counterparts.
//   ./bench_kernels --benchmark_filter=values
// Set OMP_NUM_THREADS to vary the thread count.

#include <benchmark/benchmark.h>

#include <cmath>
#include <vector>

#include "betadpd/kernels.hpp"
#include "betadpd/rng.hpp"

namespace {

using namespace betadpd;

struct Batch {
  std::vector<double> logit_y, log1m_y, mu, phi;
  kernels::ObservationView view() const { return {logit_y, log1m_y, mu, phi}; }
};

Batch make_batch(std::size_t n) {
  RngStream rng(42, n, StreamTag::response);
  Batch b;
  for (std::size_t i = 0; i < n; ++i) {
    const double mu = 0.2 + 0.6 * rng.uniform();
    const double phi = 2.0 + 50.0 * rng.uniform();
    const double y = rng.beta(mu * phi, (1.0 - mu) * phi);
    b.mu.push_back(mu);
    b.phi.push_back(phi);
    b.logit_y.push_back(std::log(y) - std::log1p(-y));
    b.log1m_y.push_back(std::log1p(-y));
  }
  return b;
}

template <bool Parallel>
void BM_values(benchmark::State& state) {
  const Batch b = make_batch(static_cast<std::size_t>(state.range(0)));
  std::vector<kernels::ObsValue> out(b.mu.size());
  for (auto _ : state) {
    const auto f = Parallel ? kernels::dpd_values_omp(b.view(), 0.3, 0.0, true, out)
                            : kernels::dpd_values_serial(b.view(), 0.3, 0.0, true, out);
    benchmark::DoNotOptimize(f);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

template <bool Parallel>
void BM_moments(benchmark::State& state) {
  const Batch b = make_batch(static_cast<std::size_t>(state.range(0)));
  std::vector<dpd::MomentTerms> out(b.mu.size());
  for (auto _ : state) {
    const auto f = Parallel ? kernels::moments_omp(b.mu, b.phi, 0.3, out)
                            : kernels::moments_serial(b.mu, b.phi, 0.3, out);
    benchmark::DoNotOptimize(f);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

BENCHMARK(BM_values<false>)->Name("values/serial")->RangeMultiplier(8)->Range(512, 1 << 18);
BENCHMARK(BM_values<true>)->Name("values/omp")->RangeMultiplier(8)->Range(512, 1 << 18);
BENCHMARK(BM_moments<false>)->Name("moments/serial")->RangeMultiplier(8)->Range(512, 1 << 18);
BENCHMARK(BM_moments<true>)->Name("moments/omp")->RangeMultiplier(8)->Range(512, 1 << 18);

}  // namespace

BENCHMARK_MAIN();
