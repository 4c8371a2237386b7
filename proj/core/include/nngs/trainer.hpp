#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "nngs/model.hpp"
#include "nngs/oracle.hpp"
#include "nngs/rewrite.hpp"

namespace nngs {

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct TrainConfig {
  int epochs = 5;
  std::size_t batch_size = 128;
  AdamConfig adam;
  std::uint64_t seed = 1;
  bool shuffle = true;
  // Global gradient norm cap; disabled when unset.
  std::optional<double> clip_norm;
  // Also evaluate the training split after each epoch.
  bool eval_train = true;
};

// Throws DomainError when a field is out of range.
void validate(const TrainConfig& cfg);

struct MetricRow {
  int epoch = 0;
  std::string split;
  double mae = 0.0;
  double accuracy = 0.0;
  double dmse = 0.0;  // mean (p - d)^2 / sqrt(d)
  double dce = 0.0;   // mean cross-entropy / sqrt(d)
};

struct DistanceRow {
  int distance = 0;
  std::size_t count = 0;
  double mae = 0.0;
  double accuracy = 0.0;
  std::optional<double> any_valid_accuracy;
};

struct Evaluation {
  MetricRow row;
  std::vector<DistanceRow> per_distance;  // d = 1..max distance present
  // Fraction whose argmax is any first step of some shortest path.
  std::optional<double> any_valid_accuracy;
};

// Per-example loss ((p - d)^2 + logsumexp(logits) - logits[c]) / sqrt(d).
// Throws DomainError when d < 1 or c is not a class.
double example_loss(double p, std::span<const double> logits, int d, std::size_t c);

// Records the same loss on a tape for one example.
Var record_loss(Tape& tape, const TapeParams& p, const Example& ex);

class Adam {
 public:
  Adam(const ModelParams& shape, AdamConfig cfg);
  void step(ModelParams& params, const ModelParams& grads);
  std::uint64_t steps() const noexcept { return t_; }

 private:
  AdamConfig cfg_;
  ModelParams m_;
  ModelParams v_;
  std::uint64_t t_ = 0;
};

// Mean loss over `batch` and its gradient accumulated into `grads` (which is
// zeroed first).
double batch_gradient(const Model& model, std::span<const Example* const> batch, ModelParams& grads,
                      Tape& tape);

// Distance estimate and 8 logits for a pair.
using Predictor = std::function<std::pair<double, std::array<double, kTransformationCount>>(
    const Expr&, const Expr&)>;

Predictor model_predictor(const Model& model);

// `valid_firsts`, when given, holds the oracle set of shortest-path first
// steps for each example and enables the any-valid accuracy.
Evaluation evaluate(std::span<const Example> examples, const Predictor& predict, int epoch,
                    const std::string& split,
                    std::span<const TransformationSet> valid_firsts = {});
Evaluation evaluate(std::span<const Example> examples, const Model& model, int epoch,
                    const std::string& split,
                    std::span<const TransformationSet> valid_firsts = {});

struct TrainResult {
  std::vector<MetricRow> metrics;
  std::uint64_t optimizer_steps = 0;
};

// Epoch 0 reports the initial metrics. After each later epoch the training
// split (when enabled) and the validation split are evaluated. `on_row` sees
// every metric row as soon as it is computed. On a non-finite value the model
// is restored to the last finite parameters and TrainingDiverged is thrown.
TrainResult train(std::span<const Example> train_set, std::span<const Example> val_set,
                  const TrainConfig& cfg, Model& model,
                  const std::function<void(const MetricRow&)>& on_row = {});

// `epoch,split,mae,accuracy,dmse,dce`
void write_metrics_csv(std::ostream& out, std::span<const MetricRow> rows);
// `distance,count,mae,accuracy,any_valid_accuracy`
void write_per_distance_csv(std::ostream& out, std::span<const DistanceRow> rows);

}  // namespace nngs
