#include <benchmark/benchmark.h>

#include <memory>
#include <numbers>

#include "varbif/bifurcation.hpp"
#include "varbif/problems.hpp"
#include "varbif/reduction.hpp"
#include "varbif/spectrum.hpp"

namespace {

using namespace varbif;

std::shared_ptr<const PencilFamily> family(const std::string& name, int resolution,
                                           const std::optional<Domain>& domain = std::nullopt) {
  const BuiltinProblem b = builtin(name, {}, domain);
  auto disc = std::make_shared<const Discretization>(build_grid(b.spec.domain, resolution), 1);
  return std::make_shared<const PencilFamily>(disc, b.spec);
}

void BM_AssembleOperators1D(benchmark::State& state) {
  const auto f = family("pitchfork", static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(f->operators());
}
BENCHMARK(BM_AssembleOperators1D)->Arg(256)->Arg(4096);

void BM_AssembleOperators2D(benchmark::State& state) {
  const auto f = family("square_odd_cubic", static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(f->operators());
}
BENCHMARK(BM_AssembleOperators2D)->Arg(32)->Arg(96);

void BM_SolvePencilDense(benchmark::State& state) {
  const DiscreteOperatorSet ops = family("linear_dirichlet", static_cast<int>(state.range(0)))->operators();
  for (auto _ : state) benchmark::DoNotOptimize(solve_pencil(ops, {0.0, 26.0}));
}
BENCHMARK(BM_SolvePencilDense)->Arg(128)->Arg(256)->Arg(512)->Unit(benchmark::kMillisecond);

void BM_SolvePencilSliced(benchmark::State& state) {
  const double pi = std::numbers::pi;
  const DiscreteOperatorSet ops =
      family("linear_dirichlet", static_cast<int>(state.range(0)), Domain::rectangle(0.0, pi, 0.0, pi))->operators();
  for (auto _ : state) benchmark::DoNotOptimize(solve_pencil(ops, {0.0, 6.0}));
}
BENCHMARK(BM_SolvePencilSliced)->Arg(96)->Unit(benchmark::kMillisecond);

void BM_MorseData(benchmark::State& state) {
  const DiscreteOperatorSet ops = family("linear_dirichlet", static_cast<int>(state.range(0)))->operators();
  for (auto _ : state) benchmark::DoNotOptimize(morse_data(ops, 7.3));
}
BENCHMARK(BM_MorseData)->Arg(256)->Unit(benchmark::kMillisecond);

void BM_CorrectorCold(benchmark::State& state) {
  const auto f = family("pitchfork", static_cast<int>(state.range(0)));
  const double ls = solve_pencil(f->operators(), {0.5, 1.5}).blocks.front().lambda;
  const KernelFrame frame = kernel_frame(*f, ls);
  const Vector z = Vector::Constant(1, 0.4);
  for (auto _ : state) {
    ReducedModel model(f, frame);
    benchmark::DoNotOptimize(model.solve_corrector(ls + 0.2, z));
  }
}
BENCHMARK(BM_CorrectorCold)->Arg(256)->Unit(benchmark::kMillisecond);

void BM_CorrectorWarm(benchmark::State& state) {
  const auto f = family("pitchfork", static_cast<int>(state.range(0)));
  const double ls = solve_pencil(f->operators(), {0.5, 1.5}).blocks.front().lambda;
  ReducedModel model(f, kernel_frame(*f, ls));
  const Vector z = Vector::Constant(1, 0.4);
  model.solve_corrector(ls + 0.2, z);
  for (auto _ : state) benchmark::DoNotOptimize(model.solve_corrector(ls + 0.2, z));
}
BENCHMARK(BM_CorrectorWarm)->Arg(256)->Unit(benchmark::kMillisecond);

void BM_FindBranchesPitchfork(benchmark::State& state) {
  const auto f = family("pitchfork", 256);
  const double ls = solve_pencil(f->operators(), {0.5, 1.5}).blocks.front().lambda;
  ReducedModel model(f, kernel_frame(*f, ls));
  BranchSearchOptions opts;
  opts.workers = static_cast<int>(state.range(0));
  const std::vector<double> grid{ls - 0.1, ls + 0.05, ls + 0.1, ls + 0.2, ls + 0.3};
  for (auto _ : state) benchmark::DoNotOptimize(find_branches(model, grid, opts));
}
BENCHMARK(BM_FindBranchesPitchfork)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond)->UseRealTime();

}  // namespace

BENCHMARK_MAIN();
