#include <benchmark/benchmark.h>

#include "nngs/search.hpp"

namespace {

using namespace nngs;

const std::vector<Instance>& instances() {
  static const std::vector<Instance> inst = [] {
    InstanceConfig cfg;
    cfg.count = 8;
    cfg.min_distance = 4;
    cfg.max_distance = 5;
    cfg.seed = 3;
    return generate_instances(cfg);
  }();
  return inst;
}

void run(benchmark::State& state, Algorithm algo) {
  ModelConfig mc;
  const Model model = Model::initialized(mc, 4);
  SearchConfig cfg;
  cfg.batch_size = 64;
  std::size_t i = 0;
  for (auto _ : state) {
    const Instance& x = instances()[i++ % instances().size()];
    benchmark::DoNotOptimize(run_search(algo, x.source, x.target, &model, cfg));
  }
}

void BM_Bfs(benchmark::State& state) { run(state, Algorithm::Bfs); }
void BM_Nngs(benchmark::State& state) { run(state, Algorithm::Nngs); }
void BM_BatchNngs(benchmark::State& state) { run(state, Algorithm::BatchNngs); }
BENCHMARK(BM_Bfs)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Nngs)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_BatchNngs)->Unit(benchmark::kMillisecond);

}  // namespace
