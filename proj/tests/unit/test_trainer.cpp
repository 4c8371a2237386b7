#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <sstream>

#include "nngs/errors.hpp"
#include "nngs/trainer.hpp"

namespace nngs {
namespace {

using T = Transformation;

ModelConfig tiny(std::size_t m) {
  ModelConfig cfg;
  cfg.memory_dim = m;
  cfg.hidden = {6, 5, 4};
  return cfg;
}

std::vector<NamedParameter> named(ModelParams& values, ModelParams& grads) {
  std::vector<NamedParameter> out;
  values.for_each([&](std::string_view name, Tensor& t) {
    out.push_back({std::string(name), &t, nullptr});
  });
  std::size_t k = 0;
  grads.for_each([&](std::string_view, Tensor& g) { out[k++].grad = &g; });
  return out;
}

std::vector<Example> small_dataset(std::size_t per_cell, int max_distance, std::uint64_t seed) {
  GenerationConfig g;
  g.max_distance = max_distance;
  g.per_cell = per_cell;
  g.seed = seed;
  return generate_dataset(g).examples;
}

TEST(ExampleLoss, UniformLogitsKnownValue) {
  const std::array<double, 8> zeros{};
  EXPECT_NEAR(example_loss(3.0, zeros, 4, 0), (1.0 + std::log(8.0)) / 2.0, 1e-12);
  EXPECT_NEAR(example_loss(3.0, zeros, 4, 0), 1.5397207708399179, 1e-12);
}

TEST(ExampleLoss, DiscountFollowsInverseSquareRoot) {
  const std::array<double, 8> logits = {0.3, -1.0, 2.0, 0.0, 0.5, 0.1, -0.2, 1.0};
  const double l1 = example_loss(2.0, logits, 1, 2);
  // Same numerator at d = 4: p shifted by 3 keeps (p - d)^2.
  const double l4 = example_loss(5.0, logits, 4, 2);
  EXPECT_NEAR(l4, l1 / 2.0, 1e-12);
}

TEST(ExampleLoss, RejectsBadInputs) {
  const std::array<double, 8> zeros{};
  EXPECT_THROW(example_loss(1.0, zeros, 0, 0), DomainError);
  EXPECT_THROW(example_loss(1.0, zeros, 1, 8), DomainError);
}

TEST(RecordLoss, MatchesClosedForm) {
  const Model model = Model::initialized(tiny(4), 71);
  const auto data = small_dataset(1, 2, 72);
  for (const Example& ex : data) {
    Tape tape;
    const TapeParams tp = record_params(tape, model.params(), nullptr);
    const double recorded = tape.scalar(record_loss(tape, tp, ex));
    const double p = model.predict_distance(ex.source, ex.target);
    const auto logits = model.predict_first_transformation(ex.source, ex.target);
    EXPECT_NEAR(recorded, example_loss(p, logits, ex.distance, index(ex.first)), 1e-12);
  }
}

TEST(GradCheck, FullLossAtSmallMemory) {
  Model model = Model::initialized(tiny(4), 73);
  ModelParams grads = ModelParams::zeros(model.config());
  const auto data = small_dataset(1, 3, 74);
  const Example& ex = data[13];
  auto loss = [&](Tape& tape) {
    const TapeParams tp = record_params(tape, model.params(), &grads);
    return record_loss(tape, tp, ex);
  };
  const auto params = named(model.params(), grads);
  const GradCheckReport r = grad_check(loss, params, 1e-5, 1e-4);
  EXPECT_TRUE(r.passed) << r.worst_parameter << "[" << r.worst_index << "] analytic "
                        << r.worst_analytic << " numeric " << r.worst_numeric;
  EXPECT_EQ(r.checked, model.params().parameter_count());
}

TEST(BatchGradient, IsTheMeanOfExampleGradients) {
  const Model model = Model::initialized(tiny(4), 75);
  const auto data = small_dataset(1, 2, 76);
  std::vector<const Example*> batch;
  for (const Example& ex : data) {
    batch.push_back(&ex);
  }
  ModelParams g = ModelParams::zeros(model.config());
  Tape tape;
  const double mean = batch_gradient(model, batch, g, tape);

  ModelParams sum = ModelParams::zeros(model.config());
  double total = 0.0;
  for (const Example& ex : data) {
    Tape t;
    const TapeParams tp = record_params(t, model.params(), &sum);
    const Var l = record_loss(t, tp, ex);
    total += t.scalar(l);
    t.backward(l);
  }
  EXPECT_NEAR(mean, total / static_cast<double>(data.size()), 1e-12);
  std::vector<double> a, b;
  g.for_each([&](std::string_view, const Tensor& t) { a.insert(a.end(), t.data().begin(), t.data().end()); });
  sum.for_each([&](std::string_view, const Tensor& t) { b.insert(b.end(), t.data().begin(), t.data().end()); });
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_NEAR(a[i], b[i] / static_cast<double>(data.size()), 1e-12);
  }
}

TEST(Adam, FirstStepMovesByLearningRate) {
  ModelParams p = ModelParams::zeros(tiny(2));
  ModelParams g = ModelParams::zeros(tiny(2));
  g.w_i(0, 0) = 3.0;
  g.b_f[1] = -0.001;
  Adam adam(p, AdamConfig{});
  adam.step(p, g);
  EXPECT_EQ(adam.steps(), 1u);
  EXPECT_NEAR(p.w_i(0, 0), -1e-3, 1e-9);
  EXPECT_NEAR(p.b_f[1], 1e-3, 1e-7);
  EXPECT_EQ(p.w_i(0, 1), 0.0);
}

TEST(Train, ConfigValidation) {
  TrainConfig cfg;
  cfg.batch_size = 0;
  EXPECT_THROW(validate(cfg), DomainError);
  cfg = TrainConfig{};
  cfg.epochs = -1;
  EXPECT_THROW(validate(cfg), DomainError);
  cfg = TrainConfig{};
  cfg.adam.lr = 0.0;
  EXPECT_THROW(validate(cfg), DomainError);
  EXPECT_NO_THROW(validate(TrainConfig{}));
}

TEST(Train, ZeroEpochsLeavesParametersUnchanged) {
  Model model = Model::initialized(tiny(4), 77);
  const Model before = model;
  const auto data = small_dataset(2, 2, 78);
  TrainConfig cfg;
  cfg.epochs = 0;
  const TrainResult r = train(data, data, cfg, model);
  EXPECT_EQ(r.optimizer_steps, 0u);
  EXPECT_EQ(model.params().w_i, before.params().w_i);
  EXPECT_EQ(model.params().classifier[0].weight, before.params().classifier[0].weight);
  ASSERT_EQ(r.metrics.size(), 2u);
  EXPECT_EQ(r.metrics[0].epoch, 0);
}

TEST(Train, SmokeRunReducesLossAndIsReproducible) {
  const auto data = small_dataset(42, 3, 79);  // 1008 examples
  ASSERT_EQ(data.size(), 1008u);
  TrainConfig cfg;
  cfg.epochs = 2;
  cfg.batch_size = 32;
  cfg.eval_train = false;
  Model model = Model::initialized(tiny(8), 80);
  std::vector<MetricRow> seen;
  const TrainResult r = train(data, data, cfg, model, [&](const MetricRow& m) { seen.push_back(m); });
  EXPECT_EQ(r.optimizer_steps, 2u * 32u);
  ASSERT_EQ(r.metrics.size(), 3u);  // validation at epochs 0, 1 and 2
  EXPECT_EQ(seen.size(), r.metrics.size());
  const MetricRow& first = r.metrics[0];
  const MetricRow& last = r.metrics.back();
  EXPECT_EQ(first.split, "validation");
  EXPECT_EQ(last.epoch, 2);
  EXPECT_LT(last.dmse + last.dce, first.dmse + first.dce);

  Model again = Model::initialized(tiny(8), 80);
  const TrainResult r2 = train(data, data, cfg, again);
  EXPECT_EQ(again.params().w_i, model.params().w_i);
  std::ostringstream a, b;
  write_metrics_csv(a, r.metrics);
  write_metrics_csv(b, r2.metrics);
  EXPECT_EQ(a.str(), b.str());
}

TEST(Evaluate, PerfectPredictorScoresPerfectly) {
  const auto data = small_dataset(3, 3, 81);
  std::map<std::string, const Example*> by_pair;
  for (const Example& ex : data) {
    by_pair[ex.source.prefix() + "|" + ex.target.prefix()] = &ex;
  }
  Predictor oracle = [&](const Expr& s, const Expr& t) {
    const Example* ex = by_pair.at(s.prefix() + "|" + t.prefix());
    std::array<double, kTransformationCount> logits{};
    logits[index(ex->first)] = 10.0;
    return std::pair{static_cast<double>(ex->distance), logits};
  };
  std::vector<TransformationSet> firsts;
  for (const Example& ex : data) {
    firsts.push_back(shortest_first_transformations(ex.source, ex.target, ex.distance));
  }
  const Evaluation ev = evaluate(data, oracle, 7, "test", firsts);
  EXPECT_EQ(ev.row.epoch, 7);
  EXPECT_EQ(ev.row.split, "test");
  EXPECT_EQ(ev.row.mae, 0.0);
  EXPECT_EQ(ev.row.accuracy, 1.0);
  EXPECT_EQ(ev.any_valid_accuracy, 1.0);
  ASSERT_EQ(ev.per_distance.size(), 3u);
  for (const DistanceRow& row : ev.per_distance) {
    EXPECT_EQ(row.count, 24u);
    EXPECT_EQ(row.accuracy, 1.0);
    EXPECT_EQ(row.mae, 0.0);
  }
}

TEST(Evaluate, ArgmaxTiesPickTheFirstClass) {
  const auto data = small_dataset(1, 1, 82);
  Predictor flat = [](const Expr&, const Expr&) {
    return std::pair{1.0, std::array<double, kTransformationCount>{}};
  };
  const Evaluation ev = evaluate(data, flat, 0, "x");
  EXPECT_DOUBLE_EQ(ev.row.accuracy, 1.0 / 8.0);
  EXPECT_FALSE(ev.any_valid_accuracy);
}

TEST(MetricsCsv, HeaderAndRows) {
  std::ostringstream out;
  const std::vector<MetricRow> rows = {{1, "train", 0.5, 0.25, 1.0, 2.0}};
  write_metrics_csv(out, rows);
  EXPECT_EQ(out.str(), "epoch,split,mae,accuracy,dmse,dce\n1,train,0.5,0.25,1,2\n");
}

TEST(PerDistanceCsv, EmptyAnyValidColumn) {
  std::ostringstream out;
  const std::vector<DistanceRow> rows = {{2, 10, 0.5, 0.75, std::nullopt}, {3, 4, 1.0, 0.5, 0.75}};
  write_per_distance_csv(out, rows);
  EXPECT_EQ(out.str(),
            "distance,count,mae,accuracy,any_valid_accuracy\n2,10,0.5,0.75,\n3,4,1,0.5,0.75\n");
}

}  // namespace
}  // namespace nngs
