// Serial reference loops against the OpenMP kernels, at the shapes of the
// default S2 x S2 truncation (lmax 16: 561 nodes x 289 modes per factor).
// The parallel variants take the thread cap as their argument.

#include <benchmark/benchmark.h>

#include "qcurv/kernels.hpp"

namespace k = qcurv::kernels;

namespace {

constexpr Eigen::Index kNodes = 561;
constexpr Eigen::Index kModes = 289;

struct Shapes {
  k::RowMatrix b = k::RowMatrix::Random(kNodes, kModes);
  k::RowMatrix c = k::RowMatrix::Random(kModes, kModes);
  k::RowMatrix v = k::RowMatrix::Random(kNodes, kNodes);
  Eigen::VectorXd w = Eigen::VectorXd::Random(kNodes).cwiseAbs();
  // Dense-assembly shape: (4, 4) truncation, 2025 nodes x 625 modes.
  k::RowMatrix phi = k::RowMatrix::Random(2025, 625);
  Eigen::VectorXd wg = Eigen::VectorXd::Random(2025).cwiseAbs();
  Eigen::VectorXd big = Eigen::VectorXd::Random(kNodes * kNodes);
};

const Shapes& shapes() {
  static const Shapes s;
  return s;
}

void threads(benchmark::State& state) { k::set_thread_cap(static_cast<int>(state.range(0))); }

void BM_synthesize_serial(benchmark::State& state) {
  const Shapes& s = shapes();
  for (auto _ : state) benchmark::DoNotOptimize(k::tensor_synthesize_serial(s.b, s.c, s.b));
}
void BM_synthesize(benchmark::State& state) {
  const Shapes& s = shapes();
  threads(state);
  for (auto _ : state) benchmark::DoNotOptimize(k::tensor_synthesize(s.b, s.c, s.b));
}

void BM_analyze_serial(benchmark::State& state) {
  const Shapes& s = shapes();
  for (auto _ : state) benchmark::DoNotOptimize(k::tensor_analyze_serial(s.b, s.w, s.v, s.w, s.b));
}
void BM_analyze(benchmark::State& state) {
  const Shapes& s = shapes();
  threads(state);
  for (auto _ : state) benchmark::DoNotOptimize(k::tensor_analyze(s.b, s.w, s.v, s.w, s.b));
}

void BM_gram_serial(benchmark::State& state) {
  const Shapes& s = shapes();
  for (auto _ : state) benchmark::DoNotOptimize(k::weighted_gram_serial(s.phi, s.wg, s.phi));
}
void BM_gram(benchmark::State& state) {
  const Shapes& s = shapes();
  threads(state);
  for (auto _ : state) benchmark::DoNotOptimize(k::weighted_gram(s.phi, s.wg, s.phi));
}

void BM_dot_serial(benchmark::State& state) {
  const Shapes& s = shapes();
  for (auto _ : state) benchmark::DoNotOptimize(k::weighted_dot_serial(s.big, s.big, s.big));
}
void BM_dot(benchmark::State& state) {
  const Shapes& s = shapes();
  threads(state);
  for (auto _ : state) benchmark::DoNotOptimize(k::weighted_dot(s.big, s.big, s.big));
}

void thread_args(benchmark::internal::Benchmark* b) {
  for (int t : {1, 2, 4, 8}) b->Arg(t);
  b->Unit(benchmark::kMillisecond)->UseRealTime();
}

}  // namespace

BENCHMARK(BM_synthesize_serial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_synthesize)->Apply(thread_args);
BENCHMARK(BM_analyze_serial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_analyze)->Apply(thread_args);
BENCHMARK(BM_gram_serial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_gram)->Apply(thread_args);
BENCHMARK(BM_dot_serial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_dot)->Apply(thread_args);

BENCHMARK_MAIN();
