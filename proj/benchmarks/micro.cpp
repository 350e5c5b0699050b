// Microbenchmarks for the hot paths: operator evaluation in both arithmetic
// modes, the Carleson norm walk, the selection pass and the end-to-end
// domination run. Instances are fixed-seed so numbers are comparable run to
// run.

#include "shiftdom/domination.hpp"
#include "shiftdom/instance_gen.hpp"
#include "shiftdom/sparse_family.hpp"

#include <benchmark/benchmark.h>

namespace {

using namespace shiftdom;

ShiftInstance<Rat> fixture(int d, int k, int m, int depth) {
  GenOptions g;
  g.d = d;
  g.k = k;
  g.m = m;
  g.depth = depth;
  g.support = 32;
  return gen_instance(7, g);
}

ShiftInstance<double> to_double(const ShiftInstance<Rat>& inst) {
  std::map<DyadicCube, double> vals;
  for (const auto& [q, v] : inst.alpha.values) vals.emplace(q, as_double(v));
  std::vector<GridFunction<double>> fs;
  for (const auto& f : inst.fs) {
    std::vector<double> leaves;
    for (const auto& v : f.leaves()) leaves.push_back(as_double(v));
    fs.push_back(GridFunction<double>::from_leaves(inst.root, std::move(leaves)));
  }
  return ShiftInstance<double>::make(
      inst.root, inst.m,
      CoefficientSequence<double>::make(inst.root, std::move(vals)),
      std::move(fs));
}

void bm_eval_shift_rational(benchmark::State& state) {
  const auto inst = fixture(1, 2, 1, static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(eval_shift(inst));
}
BENCHMARK(bm_eval_shift_rational)->Arg(6)->Arg(8);

void bm_eval_shift_float(benchmark::State& state) {
  const auto inst = to_double(fixture(1, 2, 1, static_cast<int>(state.range(0))));
  for (auto _ : state) benchmark::DoNotOptimize(eval_shift(inst));
}
BENCHMARK(bm_eval_shift_float)->Arg(6)->Arg(8);

void bm_carleson_norm(benchmark::State& state) {
  const auto inst = fixture(2, 1, 1, static_cast<int>(state.range(0)));
  for (auto _ : state)
    benchmark::DoNotOptimize(
        carleson_norm_map<Rat>(inst.root.dim, inst.alpha.values));
}
BENCHMARK(bm_carleson_norm)->Arg(4)->Arg(6);

void bm_dominate_full(benchmark::State& state) {
  const auto inst = fixture(1, 1, static_cast<int>(state.range(0)), 6);
  for (auto _ : state) benchmark::DoNotOptimize(dominate_full(inst));
}
BENCHMARK(bm_dominate_full)->Arg(1)->Arg(3);

void bm_sparsity_check(benchmark::State& state) {
  const auto inst = fixture(1, 1, 1, 6);
  const auto res = dominate_full(inst);
  for (auto _ : state)
    benchmark::DoNotOptimize(check_sparse_canonical(
        res.family.root, res.family.cubes, res.family.eta));
}
BENCHMARK(bm_sparsity_check);

} // namespace

BENCHMARK_MAIN();
