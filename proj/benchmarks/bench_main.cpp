#include <benchmark/benchmark.h>

#include "lsp/exponents.hpp"
#include "lsp/laws.hpp"
#include "lsp/profile.hpp"
#include "lsp/prox.hpp"
#include "lsp/rng.hpp"
#include "lsp/sgdlab.hpp"

namespace {

using namespace lsp;

Matrix random_matrix(std::size_t n, std::uint64_t seed) {
  CounterRng rng(seed);
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) m(i, j) = rng.normal(i, j, 0);
  return m;
}

LayerSpec relu_layer(std::size_t n, std::uint64_t seed) {
  LayerSpec l;
  l.weight = random_matrix(n, seed);
  l.bias = Vec(n, 0.0);
  l.activation = Activation::relu();
  return l;
}

void BM_spectral_norm(benchmark::State& state) {
  const Matrix a = random_matrix(static_cast<std::size_t>(state.range(0)), 42);
  for (auto _ : state) {
    benchmark::DoNotOptimize(spectral_norm_value(a));
  }
}
BENCHMARK(BM_spectral_norm)->Arg(8)->Arg(16)->Arg(64);

void BM_symmetric_part_max_eig(benchmark::State& state) {
  const Matrix a = random_matrix(static_cast<std::size_t>(state.range(0)), 43);
  for (auto _ : state) {
    benchmark::DoNotOptimize(symmetric_part_max_eig(a));
  }
}
BENCHMARK(BM_symmetric_part_max_eig)->Arg(8)->Arg(64);

void BM_profile_classical(benchmark::State& state) {
  std::vector<LayerSpec> layers;
  for (int k = 0; k < state.range(0); ++k) layers.push_back(relu_layer(8, 100 + k));
  const NetworkSpec net(std::move(layers), 8);
  const CounterRng rng(7);
  const Vec x = rng.normal_vec(0, 0, 8);
  for (auto _ : state) {
    benchmark::DoNotOptimize(profile_network(net, x, false));
  }
}
BENCHMARK(BM_profile_classical)->Arg(2)->Arg(8);

void BM_clarke_signature(benchmark::State& state) {
  const LayerSpec layer = relu_layer(static_cast<std::size_t>(state.range(0)), 77);
  for (auto _ : state) {
    benchmark::DoNotOptimize(clarke_signature(layer));
  }
}
BENCHMARK(BM_clarke_signature)->Arg(6)->Arg(10)->Arg(12);

void BM_sgd_recursion(benchmark::State& state) {
  const QuadraticObjective obj(Matrix::diagonal({1.0, 2.0}), {0.0, 0.0});
  NoiseModel noise;
  noise.sigma0 = 1.0;
  const std::size_t trials = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(verify_recursion(obj, noise, StepSchedule::constant(0.25),
                                              {3.0, -2.0}, trials, 20, 1));
  }
}
BENCHMARK(BM_sgd_recursion)->Arg(100)->Arg(1000);

void BM_prox_soft_threshold(benchmark::State& state) {
  const Regularizer reg = Regularizer::l1(0.5);
  const CounterRng rng(11);
  const Vec v = rng.normal_vec(0, 0, static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(prox(reg, v, 0.3));
  }
}
BENCHMARK(BM_prox_soft_threshold)->Arg(16)->Arg(256);

}  // namespace

BENCHMARK_MAIN();
