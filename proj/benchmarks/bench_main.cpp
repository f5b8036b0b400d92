#include "alignlab/classifier.hpp"
#include "alignlab/metrics.hpp"
#include "alignlab/networks.hpp"
#include "alignlab/theory.hpp"

#include <benchmark/benchmark.h>

namespace {

using namespace alignlab;

Matrix points(Index n, Index dim, std::uint64_t seed) {
  Rng rng = make_rng(seed);
  return gaussian_matrix(n, dim, 1.0, rng);
}

void BM_CceBetween(benchmark::State& state) {
  const Index n = state.range(0);
  const Index dim = state.range(1);
  const PointSet a(points(n, dim, 1));
  const PointSet b(points(n, dim, 2));
  for (auto _ : state) benchmark::DoNotOptimize(cce_between(a, b));
  state.SetComplexityN(n);
}
BENCHMARK(BM_CceBetween)->Args({500, 20})->Args({1000, 20})->Args({2000, 20})->Args({2000, 100})
    ->Unit(benchmark::kMillisecond);

void BM_RankTable(benchmark::State& state) {
  const PointSet a(points(state.range(0), 20, 3));
  for (auto _ : state) benchmark::DoNotOptimize(pairwise_rank_table(a));
}
BENCHMARK(BM_RankTable)->Arg(500)->Arg(2000)->Unit(benchmark::kMillisecond);

void BM_GdStep(benchmark::State& state) {
  const Activation act = state.range(0) == 0 ? Activation::linear : Activation::relu;
  const Index n = state.range(1);
  const Teacher t = sample_teacher({200, 1.0, 0.2}, 4);
  const RegressionDataset data = sample_dataset(t, n, 5);
  TwoLayerNet net = init_small(200, act == Activation::linear ? 100 : 20, act, 1e-3, 6);
  TrainConfig cfg;
  cfg.learning_rate = stable_learning_rate(data, 0.5);
  cfg.max_steps = 100;
  cfg.rel_tol = 1e-300;
  for (auto _ : state) benchmark::DoNotOptimize(train_full_batch(net, data, cfg));
  state.SetItemsProcessed(state.iterations() * 100);
}
BENCHMARK(BM_GdStep)->Args({0, 400})->Args({1, 800})->Args({1, 4000})->Unit(benchmark::kMillisecond);

void BM_Oracle(benchmark::State& state) {
  const Teacher t = sample_teacher({200, 1.0, 0.2}, 7);
  const RegressionDataset data = sample_dataset(t, state.range(0), 8);
  for (auto _ : state) benchmark::DoNotOptimize(v_star_oracle(data));
}
BENCHMARK(BM_Oracle)->Arg(100)->Arg(400)->Arg(800)->Unit(benchmark::kMillisecond);

void BM_TheoryPoint(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(theory_point(2.0, 5.0));
}
BENCHMARK(BM_TheoryPoint);

void BM_FcnnGradient(benchmark::State& state) {
  const FcnnNet net = init_fcnn(64, 784, 9);
  const Matrix images = points(128, 784, 10).cwiseAbs();
  std::vector<std::uint8_t> labels(128);
  for (std::size_t i = 0; i < labels.size(); ++i) labels[i] = static_cast<std::uint8_t>(i % kClasses);
  for (auto _ : state) benchmark::DoNotOptimize(fcnn_gradient(net, images, labels));
}
BENCHMARK(BM_FcnnGradient)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
