#include "nngs/trainer.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>
#include <ostream>

#include "nngs/errors.hpp"
#include "nngs/rng.hpp"
#include "nngs/tensor.hpp"

namespace nngs {

namespace {

std::vector<Tensor*> tensors(ModelParams& p) {
  std::vector<Tensor*> out;
  p.for_each([&](std::string_view, Tensor& t) { out.push_back(&t); });
  return out;
}

void check_example(int d, std::size_t c) {
  if (d < 1) {
    throw DomainError("loss is undefined for distance " + std::to_string(d));
  }
  if (c >= kTransformationCount) {
    throw DomainError("class index out of range: " + std::to_string(c));
  }
}

}  // namespace

void validate(const TrainConfig& cfg) {
  if (cfg.epochs < 0) {
    throw DomainError("epochs must be non-negative");
  }
  if (cfg.batch_size < 1) {
    throw DomainError("batch size must be at least 1");
  }
  const AdamConfig& a = cfg.adam;
  if (!(a.lr > 0) || !(a.beta1 > 0 && a.beta1 < 1) || !(a.beta2 > 0 && a.beta2 < 1) ||
      !(a.eps > 0)) {
    throw DomainError("Adam hyperparameters out of range");
  }
  if (cfg.clip_norm && !(*cfg.clip_norm > 0)) {
    throw DomainError("clip norm must be positive");
  }
}

double example_loss(double p, std::span<const double> logits, int d, std::size_t c) {
  check_example(d, c);
  if (logits.size() != kTransformationCount) {
    throw ShapeMismatch("expected 8 logits");
  }
  const double diff = p - static_cast<double>(d);
  const double mse = diff * diff;
  const double ce = kernels::logsumexp(logits) - logits[c];
  return (mse + ce) * (1.0 / std::sqrt(static_cast<double>(d)));
}

Var record_loss(Tape& tape, const TapeParams& p, const Example& ex) {
  const std::size_t c = index(ex.first);
  check_example(ex.distance, c);
  const Var a = record_embed(tape, p, ex.source);
  const Var b = record_embed(tape, p, ex.target);
  const Var dist = tape.manhattan(a, b);
  const Var logits = record_logits(tape, p, a, b);
  const Var diff = tape.sub(dist, tape.constant(static_cast<double>(ex.distance)));
  const Var mse = tape.mul(diff, diff);
  const Var ce = tape.sub(tape.logsumexp(logits), tape.pick(logits, c));
  return tape.scale(tape.add(mse, ce), 1.0 / std::sqrt(static_cast<double>(ex.distance)));
}

Adam::Adam(const ModelParams& shape, AdamConfig cfg) : cfg_(cfg), m_(shape), v_(shape) {
  m_.fill(0.0);
  v_.fill(0.0);
}

void Adam::step(ModelParams& params, const ModelParams& grads) {
  ++t_;
  const double c1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
  auto ps = tensors(params);
  auto gs = tensors(const_cast<ModelParams&>(grads));
  auto ms = tensors(m_);
  auto vs = tensors(v_);
  for (std::size_t k = 0; k < ps.size(); ++k) {
    auto p = ps[k]->data();
    auto g = gs[k]->data();
    auto m = ms[k]->data();
    auto v = vs[k]->data();
    if (g.size() != p.size()) {
      throw ShapeMismatch("gradient does not match parameter shape");
    }
    for (std::size_t i = 0; i < p.size(); ++i) {
      m[i] = cfg_.beta1 * m[i] + (1.0 - cfg_.beta1) * g[i];
      v[i] = cfg_.beta2 * v[i] + (1.0 - cfg_.beta2) * g[i] * g[i];
      const double mhat = m[i] / c1;
      const double vhat = v[i] / c2;
      p[i] -= cfg_.lr * mhat / (std::sqrt(vhat) + cfg_.eps);
    }
  }
}

double batch_gradient(const Model& model, std::span<const Example* const> batch, ModelParams& grads,
                      Tape& tape) {
  grads.fill(0.0);
  if (batch.empty()) {
    return 0.0;
  }
  const double seed = 1.0 / static_cast<double>(batch.size());
  double total = 0.0;
  for (const Example* ex : batch) {
    tape.clear();
    const TapeParams tp = record_params(tape, model.params(), &grads);
    const Var loss = record_loss(tape, tp, *ex);
    total += tape.scalar(loss);
    tape.backward(loss, seed);
  }
  return total / static_cast<double>(batch.size());
}

Predictor model_predictor(const Model& model) {
  return [&model](const Expr& a, const Expr& b) {
    const auto ea = model.embed(a);
    const auto eb = model.embed(b);
    return std::make_pair(model.distance(ea, eb), model.logits(ea, eb));
  };
}

Evaluation evaluate(std::span<const Example> examples, const Predictor& predict, int epoch,
                    const std::string& split, std::span<const TransformationSet> valid_firsts) {
  if (!valid_firsts.empty() && valid_firsts.size() != examples.size()) {
    throw ShapeMismatch("oracle sets do not match the examples");
  }
  struct Acc {
    std::size_t n = 0;
    double abs_err = 0.0;
    std::size_t hits = 0;
    std::size_t any_hits = 0;
  };
  std::vector<Acc> per;
  Acc all;
  double dmse = 0.0;
  double dce = 0.0;
  for (std::size_t i = 0; i < examples.size(); ++i) {
    const Example& ex = examples[i];
    const std::size_t c = index(ex.first);
    check_example(ex.distance, c);
    const auto [p, logits] = predict(ex.source, ex.target);
    const double d = static_cast<double>(ex.distance);
    const double diff = p - d;
    const double discount = 1.0 / std::sqrt(d);
    dmse += diff * diff * discount;
    dce += (kernels::logsumexp(logits) - logits[c]) * discount;
    // First maximum wins, so ties go to the lower class index.
    const auto pred = static_cast<std::size_t>(
        std::max_element(logits.begin(), logits.end()) - logits.begin());
    if (per.size() < static_cast<std::size_t>(ex.distance)) {
      per.resize(static_cast<std::size_t>(ex.distance));
    }
    for (Acc* acc : {&all, &per[static_cast<std::size_t>(ex.distance) - 1]}) {
      ++acc->n;
      acc->abs_err += std::abs(diff);
      acc->hits += pred == c ? 1 : 0;
      if (!valid_firsts.empty()) {
        acc->any_hits += valid_firsts[i].contains(transformation_at(pred)) ? 1 : 0;
      }
    }
  }
  Evaluation ev;
  ev.row.epoch = epoch;
  ev.row.split = split;
  if (all.n == 0) {
    return ev;
  }
  const double n = static_cast<double>(all.n);
  ev.row.mae = all.abs_err / n;
  ev.row.accuracy = static_cast<double>(all.hits) / n;
  ev.row.dmse = dmse / n;
  ev.row.dce = dce / n;
  if (!valid_firsts.empty()) {
    ev.any_valid_accuracy = static_cast<double>(all.any_hits) / n;
  }
  for (std::size_t d = 0; d < per.size(); ++d) {
    DistanceRow r;
    r.distance = static_cast<int>(d + 1);
    r.count = per[d].n;
    if (per[d].n > 0) {
      const double k = static_cast<double>(per[d].n);
      r.mae = per[d].abs_err / k;
      r.accuracy = static_cast<double>(per[d].hits) / k;
      if (!valid_firsts.empty()) {
        r.any_valid_accuracy = static_cast<double>(per[d].any_hits) / k;
      }
    }
    ev.per_distance.push_back(r);
  }
  return ev;
}

Evaluation evaluate(std::span<const Example> examples, const Model& model, int epoch,
                    const std::string& split, std::span<const TransformationSet> valid_firsts) {
  return evaluate(examples, model_predictor(model), epoch, split, valid_firsts);
}

namespace {

double global_norm(ModelParams& grads) {
  double sq = 0.0;
  for (Tensor* t : tensors(grads)) {
    for (double g : t->data()) {
      sq += g * g;
    }
  }
  return std::sqrt(sq);
}

}  // namespace

TrainResult train(std::span<const Example> train_set, std::span<const Example> val_set,
                  const TrainConfig& cfg, Model& model,
                  const std::function<void(const MetricRow&)>& on_row) {
  validate(cfg);
  if (train_set.empty() || val_set.empty()) {
    throw DomainError("training and validation sets must be nonempty");
  }
  TrainResult result;
  auto emit = [&](const MetricRow& row) {
    result.metrics.push_back(row);
    if (on_row) {
      on_row(row);
    }
  };
  auto report = [&](int epoch) {
    if (cfg.eval_train) {
      emit(evaluate(train_set, model, epoch, "train").row);
    }
    emit(evaluate(val_set, model, epoch, "validation").row);
  };

  report(0);

  ModelParams grads = ModelParams::zeros(model.config());
  Adam adam(model.params(), cfg.adam);
  Tape tape;
  std::vector<const Example*> order(train_set.size());
  for (std::size_t i = 0; i < order.size(); ++i) {
    order[i] = &train_set[i];
  }

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    if (cfg.shuffle) {
      Rng rng = Rng::derive(cfg.seed, static_cast<std::uint64_t>(epoch));
      rng.shuffle(order.begin(), order.end());
    }
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t end = std::min(order.size(), start + cfg.batch_size);
      const ModelParams last_good = model.params();
      try {
        batch_gradient(model, std::span(order).subspan(start, end - start), grads, tape);
        const double norm = global_norm(grads);
        if (!std::isfinite(norm)) {
          throw NonFinite("gradient norm is not finite");
        }
        if (cfg.clip_norm && norm > *cfg.clip_norm) {
          const double s = *cfg.clip_norm / norm;
          for (Tensor* t : tensors(grads)) {
            for (double& g : t->data()) {
              g *= s;
            }
          }
        }
        adam.step(model.params(), grads);
        for (Tensor* t : tensors(model.params())) {
          if (!t->all_finite()) {
            throw NonFinite("parameters became non-finite");
          }
        }
      } catch (const NonFinite& err) {
        model.params() = last_good;
        throw TrainingDiverged("training diverged in epoch " + std::to_string(epoch) + ": " +
                               err.what());
      }
    }
    report(epoch);
  }
  result.optimizer_steps = adam.steps();
  return result;
}

namespace {

void put_double(std::ostream& out, double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  out.write(buf, res.ptr - buf);
}

}  // namespace

void write_metrics_csv(std::ostream& out, std::span<const MetricRow> rows) {
  out << "epoch,split,mae,accuracy,dmse,dce\n";
  for (const MetricRow& r : rows) {
    out << r.epoch << ',' << r.split << ',';
    put_double(out, r.mae);
    out << ',';
    put_double(out, r.accuracy);
    out << ',';
    put_double(out, r.dmse);
    out << ',';
    put_double(out, r.dce);
    out << '\n';
  }
}

void write_per_distance_csv(std::ostream& out, std::span<const DistanceRow> rows) {
  out << "distance,count,mae,accuracy,any_valid_accuracy\n";
  for (const DistanceRow& r : rows) {
    out << r.distance << ',' << r.count << ',';
    put_double(out, r.mae);
    out << ',';
    put_double(out, r.accuracy);
    out << ',';
    if (r.any_valid_accuracy) {
      put_double(out, *r.any_valid_accuracy);
    }
    out << '\n';
  }
}

}  // namespace nngs
