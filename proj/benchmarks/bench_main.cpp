#include <benchmark/benchmark.h>

#include <opkr/datagen.hpp>
#include <opkr/solvers.hpp>

using namespace opkr;

namespace {

Dataset make_dataset(int m, int dim) {
  GeneratorSpec spec;
  spec.kind = GeneratorKind::LinearFunctional;
  spec.m = m;
  spec.seed = 12345;
  return generate(spec, OutputSpace::uniform_l2(0.0, 1.0, dim));
}

void BM_fit_square_per_grid_point(benchmark::State& state) {
  const int m = static_cast<int>(state.range(0));
  const Dataset Z = make_dataset(m, 64);
  const auto K = OperatorKernel::scalar_times_identity(
      ScalarKernel::gaussian(1.0), Z.space, InputKind::Function, Z.space);
  for (auto _ : state) {
    benchmark::DoNotOptimize(fit_square(K, Z, 0.1));
  }
}
BENCHMARK(BM_fit_square_per_grid_point)->Arg(25)->Arg(50)->Arg(100)->Arg(200);

void BM_gram_dense(benchmark::State& state) {
  const int m = static_cast<int>(state.range(0));
  const Dataset Z = make_dataset(m, 32);
  const auto K = OperatorKernel::scalar_times_identity(
      ScalarKernel::gaussian(1.0), Z.space, InputKind::Function, Z.space);
  const GramOperator G = K.gram(Z.inputs);
  for (auto _ : state) {
    benchmark::DoNotOptimize(G.dense());
  }
}
BENCHMARK(BM_gram_dense)->Arg(25)->Arg(50)->Arg(100);

void BM_predict(benchmark::State& state) {
  const Dataset Z = make_dataset(100, 64);
  const auto K = OperatorKernel::scalar_times_identity(
      ScalarKernel::gaussian(1.0), Z.space, InputKind::Function, Z.space);
  const RepresenterModel model = fit_square(K, Z, 0.1);
  for (auto _ : state) {
    benchmark::DoNotOptimize(model.predict(Z.inputs[0]));
  }
}
BENCHMARK(BM_predict);

}  // namespace

BENCHMARK_MAIN();
