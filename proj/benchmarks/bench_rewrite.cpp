#include <benchmark/benchmark.h>

#include "nngs/oracle.hpp"
#include "nngs/rewrite.hpp"

namespace {

using namespace nngs;

std::vector<Expr> sample(std::size_t n, int lo, int hi, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<Expr> out;
  for (std::size_t i = 0; i < n; ++i) {
    out.push_back(random_walk(gen_random_expr(lo, hi, rng), 6, rng));
  }
  return out;
}

void BM_Neighbors(benchmark::State& state) {
  const auto exprs = sample(256, 4, static_cast<int>(state.range(0)), 1);
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(neighbors(exprs[i++ % exprs.size()]));
  }
}
BENCHMARK(BM_Neighbors)->Arg(5)->Arg(7);

void BM_ApplyCommute(benchmark::State& state) {
  const Expr e = parse("(F (+ (* a b) (* a c)))");
  for (auto _ : state) {
    benchmark::DoNotOptimize(apply(e, Transformation::Commute));
  }
}
BENCHMARK(BM_ApplyCommute);

void BM_ParsePrint(benchmark::State& state) {
  const auto exprs = sample(256, 4, 6, 2);
  std::vector<std::string> texts;
  for (const Expr& e : exprs) {
    texts.push_back(print(e));
  }
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(print(parse(texts[i++ % texts.size()])));
  }
}
BENCHMARK(BM_ParsePrint);

void BM_BfsDistance(benchmark::State& state) {
  Rng rng(3);
  const Expr s = gen_random_expr(4, 5, rng);
  const DistanceBall ball = DistanceBall::explore(s, static_cast<int>(state.range(0)));
  const Expr t = *ball.layer(static_cast<int>(state.range(0))).front();
  for (auto _ : state) {
    benchmark::DoNotOptimize(bfs_distance(s, t, static_cast<int>(state.range(0))));
  }
}
BENCHMARK(BM_BfsDistance)->Arg(3)->Arg(5)->Unit(benchmark::kMillisecond);

}  // namespace
