#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "epq/certificates.hpp"
#include "epq/kernels.hpp"
#include "epq/simulate.hpp"
#include "epq/system.hpp"

namespace {

using epq::Vec;

std::vector<Vec> points(int n, std::size_t count) {
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> u(-10.0, 10.0);
  std::vector<Vec> xs(count, Vec(n));
  for (Vec& x : xs)
    for (int i = 0; i < n; ++i) x(i) = u(rng);
  return xs;
}

std::vector<double> axis(int k) {
  std::vector<double> a(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) a[static_cast<std::size_t>(i)] = -5.0 + 10.0 * i / (k - 1);
  return a;
}

template <bool Omp>
void BM_EnergyProduct(benchmark::State& st) {
  const int n = static_cast<int>(st.range(0));
  const auto sys = epq::random_system(n, 9);
  const auto xs = points(n, 20000);
  for (auto _ : st)
    benchmark::DoNotOptimize(Omp ? epq::kernels::max_energy_product_omp(sys, xs)
                                 : epq::kernels::max_energy_product_serial(sys, xs));
  st.SetItemsProcessed(st.iterations() * static_cast<long>(xs.size()));
}

template <bool Omp>
void BM_IdentityResidual(benchmark::State& st) {
  const auto [sys, cert] = epq::builtin_counterexample();
  const auto xs = points(3, 20000);
  for (auto _ : st)
    benchmark::DoNotOptimize(Omp ? epq::kernels::max_identity_residual_omp(sys, cert, xs)
                                 : epq::kernels::max_identity_residual_serial(sys, cert, xs));
  st.SetItemsProcessed(st.iterations() * static_cast<long>(xs.size()));
}

template <bool Omp>
void BM_LambdaMaxGrid(benchmark::State& st) {
  const auto sys = epq::random_system(3, 11);
  const auto ax = axis(static_cast<int>(st.range(0)));
  for (auto _ : st)
    benchmark::DoNotOptimize(Omp ? epq::kernels::lambda_max_grid_omp(sys, ax).value
                                 : epq::kernels::lambda_max_grid_serial(sys, ax).value);
}

template <bool Omp>
void BM_Trials(benchmark::State& st) {
  const auto [sys, cert] = epq::builtin_counterexample();
  const auto x0s = points(3, static_cast<std::size_t>(st.range(0)));
  epq::IntegrateOptions io;
  io.t_final = 20.0;
  io.recording = epq::Recording::Sampled;
  io.output_dt = 0.1;
  for (auto _ : st)
    benchmark::DoNotOptimize(Omp ? epq::kernels::run_trials_omp(sys, x0s, io)
                                 : epq::kernels::run_trials_serial(sys, x0s, io));
}

}  // namespace

BENCHMARK(BM_EnergyProduct<false>)->Arg(3)->Arg(8)->Name("energy_product/serial");
BENCHMARK(BM_EnergyProduct<true>)->Arg(3)->Arg(8)->Name("energy_product/omp");
BENCHMARK(BM_IdentityResidual<false>)->Name("identity_residual/serial");
BENCHMARK(BM_IdentityResidual<true>)->Name("identity_residual/omp");
BENCHMARK(BM_LambdaMaxGrid<false>)->Arg(21)->Name("lambda_max_grid/serial")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_LambdaMaxGrid<true>)->Arg(21)->Name("lambda_max_grid/omp")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Trials<false>)->Arg(16)->Name("trials/serial")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Trials<true>)->Arg(16)->Name("trials/omp")->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
