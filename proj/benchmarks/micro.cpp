// Micro benchmarks for the inner kernels of the recovery algorithms.

#include <benchmark/benchmark.h>

#include "sparse_spike/enumerate.hpp"
#include "sparse_spike/huber.hpp"
#include "sparse_spike/linalg.hpp"
#include "sparse_spike/model.hpp"
#include "sparse_spike/sdp.hpp"

namespace {

using namespace sparse_spike;

Instance wishart(Index d, Index n, Index k, double beta) {
  return gen_wishart(n, gen_sparse_spike(d, k, false, 1), beta, 2);
}

void BM_Gram(benchmark::State& state) {
  const Index d = state.range(0);
  const Instance inst = wishart(d, 2 * d, 8, 2.0);
  for (auto _ : state) benchmark::DoNotOptimize(gram(inst.data));
  state.SetComplexityN(d);
}
BENCHMARK(BM_Gram)->RangeMultiplier(2)->Range(64, 512)->Complexity();

void BM_TopEigenvector(benchmark::State& state) {
  const Index d = state.range(0);
  const SymMatrix g = gram(wishart(d, 2 * d, 8, 2.0).data);
  for (auto _ : state) benchmark::DoNotOptimize(top_eigenvector(g).value);
  state.SetComplexityN(d);
}
BENCHMARK(BM_TopEigenvector)->RangeMultiplier(2)->Range(32, 512)->Complexity();

// One selector: pattern response plus thresholding.
void BM_Selector(benchmark::State& state) {
  const Index d = state.range(0);
  const RecoveryProblem p = RecoveryProblem::from_instance(wishart(d, 2 * d, 8, 2.0));
  const PatternEnumerator patterns(d, 2);
  const SignPattern s = patterns.at(patterns.size() / 2);
  for (auto _ : state) {
    benchmark::DoNotOptimize(threshold_selector(pattern_response(p.response, s), s, 0.125, p.scale).count());
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_Selector)->Arg(128)->Arg(512);

// Full t = 1 recovery, the unit of work behind `bench`.
void BM_RecoverT1(benchmark::State& state) {
  const Instance inst = wishart(state.range(0), 2 * state.range(0), 8, 3.0);
  RecoverConfig cfg;
  cfg.k = 8;
  cfg.t = 1;
  cfg.threads = 1;
  for (auto _ : state) benchmark::DoNotOptimize(recover(inst, cfg).score);
}
BENCHMARK(BM_RecoverT1)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);

void BM_BasicSdp(benchmark::State& state) {
  const Index d = state.range(0);
  const SymMatrix g = gram(wishart(d, d / 2, 8, 2.0).data);
  SdpOptions options;
  options.iters = state.range(1);
  options.certify_psd = false;
  for (auto _ : state) benchmark::DoNotOptimize(solve_basic_sdp(g, 8.0, options).objective);
}
BENCHMARK(BM_BasicSdp)->Args({64, 5})->Args({128, 5})->Args({128, 50})->Unit(benchmark::kMillisecond);

void BM_MinimizeHuber(benchmark::State& state) {
  const Index d = state.range(0);
  const double lambda = 500.0;
  const Instance inst = gen_symmetric(gen_sparse_spike(d, 4, true, 3), lambda, NoiseSpec::cauchy(), 4);
  HuberConfig cfg;
  cfg.lambda = lambda;
  const double h = cfg.resolved_h(4);
  const Eigen::MatrixXd y = clamp(inst.data, h);
  for (auto _ : state) {
    benchmark::DoNotOptimize(minimize_huber(y, lambda, 4.0, h, 100, cfg.tol).objective);
  }
}
BENCHMARK(BM_MinimizeHuber)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
