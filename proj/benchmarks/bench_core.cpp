#include <benchmark/benchmark.h>

#include "llps/chain.hpp"
#include "llps/oracle.hpp"
#include "llps/solver.hpp"

using namespace llps;

namespace {

InducedChain make_chain(int length) {
  Xoshiro256StarStar gen(static_cast<std::uint64_t>(length));
  std::vector<ChainPosition> pos;
  for (int j = 0; j < length; ++j) {
    const double a = 0.05 + 0.9 * gen.uniform01();
    const double b = 0.05 + 0.9 * gen.uniform01();
    if (j == 0)
      pos.push_back({a, b, a, b});
    else
      pos.push_back({a, b, 0.05 + 0.9 * gen.uniform01(), 0.05 + 0.9 * gen.uniform01()});
  }
  return InducedChain(std::move(pos));
}

void BM_BuildJoint(benchmark::State& state) {
  const InducedChain chain = make_chain(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(build_joint(chain));
}
BENCHMARK(BM_BuildJoint)->DenseRange(4, 10, 2);

void BM_Stationary(benchmark::State& state) {
  const InducedChain chain = make_chain(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(stationary(chain));
}
BENCHMARK(BM_Stationary)->DenseRange(4, 12, 2);

void BM_SolveLine(benchmark::State& state) {
  const ProblemInstance inst = random_instance(DirectedTree::line(12), 1);
  const int k = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(solve(inst, k));
}
BENCHMARK(BM_SolveLine)->DenseRange(1, 4, 1);

void BM_Exhaustive(benchmark::State& state) {
  Xoshiro256StarStar gen(2);
  const int n = static_cast<int>(state.range(0));
  std::vector<std::optional<int>> parent(static_cast<std::size_t>(n));
  for (int i = 1; i < n; ++i) parent[static_cast<std::size_t>(i)] = (i - 1) / 2;  // binary tree
  const ProblemInstance inst = random_instance(DirectedTree::from_parents(parent), gen);
  for (auto _ : state) benchmark::DoNotOptimize(exhaustive_search(inst));
}
BENCHMARK(BM_Exhaustive)->DenseRange(5, 9, 2);

}  // namespace

BENCHMARK_MAIN();
