#include <benchmark/benchmark.h>

#include "nngs/model.hpp"
#include "nngs/oracle.hpp"
#include "nngs/trainer.hpp"

namespace {

using namespace nngs;

std::vector<Expr> sample(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<Expr> out;
  for (std::size_t i = 0; i < n; ++i) {
    out.push_back(random_walk(gen_random_expr(4, 6, rng), 6, rng));
  }
  return out;
}

void BM_EmbedSerial(benchmark::State& state) {
  ModelConfig cfg;
  cfg.memory_dim = static_cast<std::size_t>(state.range(0));
  const Model model = Model::initialized(cfg, 1);
  const auto exprs = sample(128, 2);
  for (auto _ : state) {
    for (const Expr& e : exprs) {
      benchmark::DoNotOptimize(model.embed(e));
    }
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(exprs.size()));
}
BENCHMARK(BM_EmbedSerial)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_EmbedBatch(benchmark::State& state) {
  ModelConfig cfg;
  cfg.memory_dim = static_cast<std::size_t>(state.range(0));
  const Model model = Model::initialized(cfg, 1);
  const auto exprs = sample(128, 2);
  for (auto _ : state) {
    benchmark::DoNotOptimize(model.batch_embed(exprs));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(exprs.size()));
}
BENCHMARK(BM_EmbedBatch)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_TrainStep(benchmark::State& state) {
  GenerationConfig g;
  g.max_distance = 4;
  g.per_cell = 4;
  const auto data = generate_dataset(g).examples;
  std::vector<const Example*> batch;
  for (std::size_t i = 0; i < data.size() && batch.size() < 128; ++i) {
    batch.push_back(&data[i]);
  }
  ModelConfig cfg;
  Model model = Model::initialized(cfg, 2);
  ModelParams grads = ModelParams::zeros(cfg);
  Adam adam(model.params(), AdamConfig{});
  Tape tape;
  for (auto _ : state) {
    benchmark::DoNotOptimize(batch_gradient(model, batch, grads, tape));
    adam.step(model.params(), grads);
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(batch.size()));
}
BENCHMARK(BM_TrainStep)->Unit(benchmark::kMillisecond);

}  // namespace
