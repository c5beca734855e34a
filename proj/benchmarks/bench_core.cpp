#include <benchmark/benchmark.h>

#include "bgdsa/design.hpp"
#include "bgdsa/engine.hpp"
#include "bgdsa/rate.hpp"

namespace {

using namespace bgdsa;

GossipParams make_network(int n, double density, std::uint64_t seed) {
  Rng rng = make_rng(seed, 0);
  const Digraph g = random_strongly_connected(n, density, rng);
  return make_uniform_params(g, Vec::Constant(n, 1.0 / n), 0.9, 0.5);
}

ModelPtr make_model(int n, std::uint64_t seed) {
  Rng rng = make_rng(seed, 1);
  Vec means(n), sigmas(n);
  for (int i = 0; i < n; ++i) {
    means[i] = 10.0 * u01(rng);
    sigmas[i] = 0.5 + 2.0 * u01(rng);
  }
  return gaussian_mean_model(means, sigmas);
}

void BM_EventStep(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const Variant variant = state.range(1) ? Variant::ACU : Variant::AUC;
  const GossipParams params = make_network(n, 0.3, 7);
  const ModelPtr model = make_model(n, 7);
  const StepSizePolicy policy = ConstantStep{0.01};

  NetworkState s = make_initial_state(n, 1, Mat::Zero(n, 1));
  Rng rng = make_rng(7, 2);
  for (auto _ : state) {
    s = event_step(s, sample_event(params, rng), params, *model, policy, variant, rng);
  }
  benchmark::DoNotOptimize(s.X);
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_EventStep)->Args({10, 0})->Args({10, 1})->Args({100, 0})->Args({100, 1});

void BM_MeanMatrix(benchmark::State& state) {
  const GossipParams params = make_network(static_cast<int>(state.range(0)), 0.3, 8);
  for (auto _ : state) {
    benchmark::DoNotOptimize(mean_matrix(params));
  }
}
BENCHMARK(BM_MeanMatrix)->Arg(10)->Arg(50)->Arg(100);

void BM_StationaryVector(benchmark::State& state) {
  const GossipParams params = make_network(static_cast<int>(state.range(0)), 0.3, 9);
  const Mat mean = mean_matrix(params);
  for (auto _ : state) {
    benchmark::DoNotOptimize(stationary_vector(mean));
  }
}
BENCHMARK(BM_StationaryVector)->Arg(10)->Arg(50)->Arg(100);

void BM_DesignMixing(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const GossipParams params = make_network(n, 0.3, 10);
  Rng rng = make_rng(10, 3);
  Vec phi(n);
  for (int i = 0; i < n; ++i) phi[i] = 0.5 + u01(rng);
  phi /= phi.sum();
  for (auto _ : state) {
    benchmark::DoNotOptimize(algorithm_b(params.graph, DesignTarget{phi},
                                         params.clock_probs, params.reception_probs));
  }
}
BENCHMARK(BM_DesignMixing)->Arg(10)->Arg(50);

void BM_EstimateG(benchmark::State& state) {
  const GossipParams params = make_network(10, 0.35, 11);
  const int tail = suggest_tail_length(params, 400, 400, 11);
  for (auto _ : state) {
    benchmark::DoNotOptimize(estimate_g(params, Variant::AUC, tail, 200, 11));
  }
}
BENCHMARK(BM_EstimateG);

}  // namespace

BENCHMARK_MAIN();
