// Acceptance suite: runs every criterion and prints one PASS/FAIL line each.
#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <unordered_set>
#include <vector>

#include "generators.hpp"
#include "nngs/errors.hpp"
#include "nngs/model.hpp"
#include "nngs/oracle.hpp"
#include "nngs/rewrite.hpp"
#include "nngs/search.hpp"
#include "nngs/trainer.hpp"

namespace fs = std::filesystem;
using namespace nngs;
using Clock = std::chrono::steady_clock;
using T = Transformation;

namespace {

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct CriterionResult {
  int id;
  bool pass;
  std::string summary;
};

std::vector<CriterionResult> g_verdicts;

void report(int id, bool pass, const std::string& summary) {
  g_verdicts.push_back({id, pass, summary});
  std::cout << (pass ? "PASS" : "FAIL") << " criterion " << id << ": " << summary << std::endl;
}

void detail(const std::string& line) { std::cout << "  " << line << std::endl; }

std::string fmt(double v, int digits = 3) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(digits) << v;
  return s.str();
}

double mean(const std::vector<double>& v) {
  if (v.empty()) {
    return 0.0;
  }
  double s = 0.0;
  for (double x : v) {
    s += x;
  }
  return s / static_cast<double>(v.size());
}

std::string distribution(std::vector<double> v) {
  if (v.empty()) {
    return "n=0";
  }
  std::sort(v.begin(), v.end());
  auto q = [&](double p) {
    const double pos = p * static_cast<double>(v.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = static_cast<std::size_t>(std::ceil(pos));
    return v[lo] + (v[hi] - v[lo]) * (pos - static_cast<double>(lo));
  };
  std::ostringstream s;
  s << "n=" << v.size() << " mean=" << fmt(mean(v), 1) << " min=" << v.front()
    << " q1=" << fmt(q(0.25), 1) << " median=" << fmt(q(0.5), 1) << " q3=" << fmt(q(0.75), 1)
    << " p90=" << fmt(q(0.9), 1) << " max=" << v.back();
  return s.str();
}

std::ofstream open_out(const fs::path& p) {
  std::ofstream f(p, std::ios::binary);
  if (!f) {
    throw std::runtime_error("cannot write " + p.string());
  }
  return f;
}

std::size_t focus_count(const Expr& e) {
  const std::string& p = e.prefix();
  return static_cast<std::size_t>(std::count(p.begin(), p.end(), token(Symbol::Focus)));
}

// ------------------------------------------------------------ criterion 1

void criterion_soundness() {
  const auto t0 = Clock::now();
  Rng rng(101);
  std::size_t pairs = 0;
  std::size_t failures = 0;
  std::map<T, std::size_t> per_kind;
  auto inverse_holds = [](T t, const Expr& e, const Expr& r) {
    switch (t) {
      case T::Commute:
        return apply(r, T::Commute) == e;
      case T::AssocToRight:
        return apply(r, T::AssocToLeft) == e;
      case T::AssocToLeft:
        return apply(r, T::AssocToRight) == e;
      case T::Distribute:
        return apply(r, T::Factor) == e;
      case T::Factor:
        return apply(r, T::Distribute) == e;
      case T::FocusLeft:
      case T::FocusRight:
        return apply(r, T::FocusUp) == e;
      case T::FocusUp:
        return apply(r, T::FocusLeft) == e || apply(r, T::FocusRight) == e;
    }
    return false;
  };
  while (pairs < 10'000) {
    const Expr e = testing::random_focused_expr(rng, 2, 6, 10);
    const auto nb = neighbors(e);
    if (nb.empty()) {
      continue;
    }
    const auto& [t, r] = nb[rng.below(nb.size())];
    ++pairs;
    ++per_kind[t];
    bool ok = focus_count(r) == 1 && parse(print(r)) == r && inverse_holds(t, e, r);
    for (int k = 0; k < 3 && ok; ++k) {
      const Assignment v = testing::random_assignment(rng);
      ok = evaluate(e, v, kEvalPrime) == evaluate(r, v, kEvalPrime);
    }
    if (!ok) {
      ++failures;
      detail("unsound: " + print(e) + " --" + std::string(name(t)) + "--> " + print(r));
    }
  }
  std::ostringstream kinds;
  for (const auto& [t, n] : per_kind) {
    kinds << ' ' << name(t) << '=' << n;
  }
  detail("pairs per transformation:" + kinds.str());
  const double secs = seconds_since(t0);
  report(1, failures == 0 && secs < 60.0,
         std::to_string(pairs - failures) + "/" + std::to_string(pairs) +
             " pairs sound (evaluation, focus count, inverse), " + fmt(secs, 2) + " s (limit 60 s)");
}

// ------------------------------------------------------------ criterion 3

void criterion_encoder() {
  std::size_t ok = 0;
  const auto exprs = testing::random_exprs(103, 10'000, 2, 8);
  for (const Expr& e : exprs) {
    const std::string text = print(e);
    const Expr back = parse(text);
    const PostOrderSeq seq = encode_postorder(e);
    if (back == e && print(back) == text && decode_postorder(seq) == e &&
        seq.values.size() == length(e)) {
      ++ok;
    }
  }
  const PostOrderSeq fig = encode_postorder(parse("(* a (F (+ b c)))"));
  const bool order = fig.values == std::vector<Symbol>{Symbol::A, Symbol::B, Symbol::C,
                                                       Symbol::Add, Symbol::Focus, Symbol::Mul} &&
                     fig.arities == std::vector<std::uint8_t>{0, 0, 0, 2, 1, 2};
  std::string seq_text;
  for (Symbol s : fig.values) {
    seq_text += token(s);
  }
  report(3, ok == exprs.size() && order,
         std::to_string(ok) + "/" + std::to_string(exprs.size()) +
             " round trips; (* a (F (+ b c))) post-order " + seq_text + (order ? " matches" : " differs"));
}

// ------------------------------------------------------------ criterion 4

void criterion_batch_equivalence() {
  ModelConfig cfg;
  const Model model = Model::initialized(cfg, 104);
  const auto exprs = testing::random_exprs(105, 500, 2, 8);
  const std::vector<std::size_t> sizes = {1, 7, 64, 3, 128, 31, 2, 100, 16, 148};
  const std::vector<Expr> padding = {parse("(* (+ (* a (+ b c)) (* c c)) (F (+ (* (+ a b) c) (+ b (* a a)))))"),
                                     parse("(F a)")};
  double worst = 0.0;
  std::size_t start = 0;
  std::size_t batches = 0;
  bool padding_inert = true;
  for (std::size_t k = 0; start < exprs.size(); ++k) {
    const std::size_t n = std::min(sizes[k % sizes.size()], exprs.size() - start);
    const std::span<const Expr> batch(exprs.data() + start, n);
    const auto out = model.batch_embed(batch);
    for (std::size_t i = 0; i < n; ++i) {
      const auto serial = model.embed(batch[i]);
      for (std::size_t r = 0; r < serial.size(); ++r) {
        worst = std::max(worst, std::abs(serial[r] - out[i][r]));
      }
    }
    std::vector<Expr> padded(batch.begin(), batch.end());
    padded.insert(padded.end(), padding.begin(), padding.end());
    const auto with_padding = model.batch_embed(padded);
    for (std::size_t i = 0; i < n; ++i) {
      padding_inert = padding_inert && with_padding[i] == out[i];
    }
    start += n;
    ++batches;
  }
  std::ostringstream s;
  s << std::scientific << std::setprecision(2) << worst;
  report(4, worst <= 1e-9 && padding_inert,
         "500 expressions in " + std::to_string(batches) + " mixed batches, max |batch - serial| = " +
             s.str() + " (limit 1e-9); extra lanes " +
             (padding_inert ? "bit-identical" : "changed results"));
}

// ------------------------------------------------------------ criterion 5

void criterion_grad_check() {
  ModelConfig cfg;
  cfg.memory_dim = 4;
  Model model = Model::initialized(cfg, 106);
  ModelParams grads = ModelParams::zeros(cfg);
  GenerationConfig g;
  g.min_distance = 3;
  g.max_distance = 3;
  g.per_cell = 1;
  g.seed = 107;
  const auto data = generate_dataset(g).examples;
  const Example& ex = data[index(T::Distribute)];
  auto loss = [&](Tape& tape) {
    const TapeParams tp = record_params(tape, model.params(), &grads);
    return record_loss(tape, tp, ex);
  };
  std::vector<NamedParameter> params;
  model.params().for_each(
      [&](std::string_view n, Tensor& t) { params.push_back({std::string(n), &t, nullptr}); });
  std::size_t k = 0;
  grads.for_each([&](std::string_view, Tensor& t) { params[k++].grad = &t; });
  const GradCheckReport r = grad_check(loss, params, 1e-5, 1e-4, 1e-6);
  std::ostringstream s;
  s << std::scientific << std::setprecision(2) << r.max_rel_error;
  detail("example: d=" + std::to_string(ex.distance) + " first=" + std::string(name(ex.first)) + " " +
         print(ex.source) + " -> " + print(ex.target));
  detail("worst coordinate " + r.worst_parameter + "[" + std::to_string(r.worst_index) +
         "] analytic " + std::to_string(r.worst_analytic) + " numeric " +
         std::to_string(r.worst_numeric));
  report(5, r.passed,
         std::to_string(r.checked) + " parameters at M=4, eps 1e-5, max relative error " + s.str() +
             " (limit 1e-4)");
}

// ------------------------------------------------- pipeline (2, 6, 7, 10)

struct PipelineConfig {
  GenerationConfig gen;
  SplitRatios ratios;
  std::size_t oracle_examples = 500;
  TrainConfig train;
  ModelConfig model;
  InstanceConfig instances;
  SearchConfig search;
};

PipelineConfig pipeline_config() {
  PipelineConfig p;
  p.gen.min_distance = 1;
  p.gen.max_distance = 6;
  p.gen.per_cell = 1042;  // 6 * 8 * 1042 = 50,016 examples
  p.gen.height_lo = 4;
  p.gen.height_hi = 6;
  p.gen.seed = 2024;
  p.train.epochs = 5;
  p.train.batch_size = 128;
  p.train.seed = 11;
  p.train.eval_train = false;
  p.model.memory_dim = 32;
  p.instances.count = 120;
  p.instances.height_lo = 4;
  p.instances.height_hi = 6;
  p.instances.min_distance = 6;
  p.instances.max_distance = 8;
  p.instances.seed = 7;
  p.search.alpha = 0.5;
  p.search.batch_size = 512;
  p.search.timeout = std::chrono::seconds(120);
  return p;
}

struct OracleSummary {
  std::size_t checked = 0;
  std::size_t distance_ok = 0;
  std::size_t first_ok = 0;
  std::size_t bfs_len_ok = 0;
  std::size_t found = 0;
  std::size_t certificates_ok = 0;
  double seconds = 0.0;
};

struct PipelineResult {
  OracleSummary oracle;
  Evaluation test_eval;
  double train_seconds = 0.0;
  double generation_seconds = 0.0;
  std::size_t dataset_size = 0;
  std::vector<Instance> instances;
  std::vector<BenchRow> rows;
  std::unordered_set<std::string> dataset_pairs;
  Model model;
};

// Files whose bytes must agree between two runs.
const std::vector<std::string> kDeterministicFiles = {
    "train.tsv",   "validation.tsv",  "test.tsv",         "stats.csv",
    "oracle.tsv",  "model.txt",       "metrics.csv",      "per_distance.csv",
    "instances.tsv", "bench.csv"};

OracleSummary oracle_suite(const std::vector<Example>& all, const fs::path& dir,
                           std::uint64_t seed, std::size_t count) {
  const auto t0 = Clock::now();
  std::vector<std::size_t> order(all.size());
  for (std::size_t i = 0; i < order.size(); ++i) {
    order[i] = i;
  }
  Rng rng(seed);
  rng.shuffle(order.begin(), order.end());
  order.resize(std::min(count, order.size()));
  std::sort(order.begin(), order.end());

  OracleSummary s;
  auto out = open_out(dir / "oracle.tsv");
  out << "index\tdistance\tbfs_distance\tfirst\tnext_distance\tbfs_path_len\tcertificate\n";
  SearchConfig bfs_cfg;
  for (std::size_t idx : order) {
    const Example& ex = all[idx];
    ++s.checked;
    const auto d = bfs_distance(ex.source, ex.target, ex.distance);
    const auto next = apply(ex.source, ex.first);
    std::optional<int> nd;
    if (next) {
      nd = bfs_distance(*next, ex.target, ex.distance);
    }
    const SearchResult r = bfs_search(ex.source, ex.target, bfs_cfg);
    const bool found = r.outcome == Outcome::Found;
    const bool cert = found && check_certificate(ex.source, ex.target, r.path).valid;
    s.distance_ok += d == ex.distance ? 1 : 0;
    s.first_ok += nd == ex.distance - 1 ? 1 : 0;
    s.found += found ? 1 : 0;
    s.bfs_len_ok += found && static_cast<int>(r.path.size()) == ex.distance ? 1 : 0;
    s.certificates_ok += cert ? 1 : 0;
    out << idx << '\t' << ex.distance << '\t' << (d ? std::to_string(*d) : "-") << '\t'
        << name(ex.first) << '\t' << (nd ? std::to_string(*nd) : "-") << '\t'
        << (found ? std::to_string(r.path.size()) : "-") << '\t' << (cert ? "Valid" : "Invalid")
        << '\n';
  }
  s.seconds = seconds_since(t0);
  return s;
}

PipelineResult run_pipeline(const PipelineConfig& cfg, const fs::path& dir, bool verbose) {
  fs::create_directories(dir);
  PipelineResult res;

  auto t0 = Clock::now();
  const GenerationResult gen = generate_dataset(cfg.gen);
  if (!gen.shortfalls.empty()) {
    throw std::runtime_error("dataset generation left " + std::to_string(gen.shortfalls.size()) +
                             " cells short");
  }
  const auto splits = split_dataset(gen.examples, cfg.ratios, cfg.gen.seed);
  std::vector<std::pair<std::string, DatasetStats>> stats;
  for (const Dataset& d : splits) {
    auto f = open_out(dir / (std::string(name(d.split)) + ".tsv"));
    write_examples(f, d.examples);
    stats.emplace_back(std::string(name(d.split)), dataset_stats(d));
  }
  {
    auto f = open_out(dir / "stats.csv");
    write_stats_csv(f, stats);
  }
  res.generation_seconds = seconds_since(t0);
  res.dataset_size = gen.examples.size();
  for (const Example& ex : gen.examples) {
    res.dataset_pairs.insert(pair_key(ex.source, ex.target));
  }
  if (verbose) {
    detail("dataset: " + std::to_string(gen.examples.size()) + " examples from " +
           std::to_string(gen.sources_used) + " sources in " + fmt(res.generation_seconds, 1) +
           " s (train " + std::to_string(splits[0].examples.size()) + ", validation " +
           std::to_string(splits[1].examples.size()) + ", test " +
           std::to_string(splits[2].examples.size()) + ")");
  }

  res.oracle = oracle_suite(gen.examples, dir, cfg.gen.seed + 1, cfg.oracle_examples);

  t0 = Clock::now();
  res.model = Model::initialized(cfg.model, cfg.train.seed);
  const TrainResult tr = train(splits[0].examples, splits[1].examples, cfg.train, res.model,
                               [&](const MetricRow& r) {
                                 if (verbose) {
                                   detail("epoch " + std::to_string(r.epoch) + " " + r.split +
                                          " mae " + fmt(r.mae) + " accuracy " + fmt(r.accuracy) +
                                          " dmse " + fmt(r.dmse) + " dce " + fmt(r.dce));
                                 }
                               });
  res.train_seconds = seconds_since(t0);
  save_model(res.model, (dir / "model.txt").string());

  std::vector<TransformationSet> firsts;
  for (const Example& ex : splits[2].examples) {
    firsts.push_back(shortest_first_transformations(ex.source, ex.target, ex.distance));
  }
  res.test_eval = evaluate(splits[2].examples, res.model, cfg.train.epochs, "test", firsts);
  {
    std::vector<MetricRow> rows = tr.metrics;
    rows.push_back(res.test_eval.row);
    auto f = open_out(dir / "metrics.csv");
    write_metrics_csv(f, rows);
  }
  {
    auto f = open_out(dir / "per_distance.csv");
    write_per_distance_csv(f, res.test_eval.per_distance);
  }

  res.instances = generate_instances(cfg.instances, res.dataset_pairs);
  {
    auto f = open_out(dir / "instances.tsv");
    write_instances(f, res.instances);
  }
  res.rows = bench(res.instances, {Algorithm::Bfs, Algorithm::Nngs, Algorithm::BatchNngs},
                   &res.model, cfg.search, 1);
  {
    auto f = open_out(dir / "bench_timed.csv");
    write_bench_csv(f, res.rows);
  }
  // Same report without the wall-clock column, for byte comparison.
  {
    std::ostringstream full;
    write_bench_csv(full, res.rows);
    std::istringstream in(full.str());
    auto f = open_out(dir / "bench.csv");
    std::string line;
    while (std::getline(in, line)) {
      f << line.substr(0, line.rfind(',')) << '\n';
    }
  }
  return res;
}

// Per-algorithm aggregates over the bench rows.
struct AlgoSummary {
  std::vector<double> expanded;
  std::vector<double> lengths;     // Found rows
  std::vector<double> distances;   // oracle distance of the Found rows
  std::size_t found = 0;
  std::size_t valid = 0;
  std::size_t shorter_than_oracle = 0;
  std::map<std::string, std::size_t> outcomes;
};

AlgoSummary summarize(const std::vector<BenchRow>& rows, const std::vector<Instance>& instances,
                      Algorithm a) {
  std::map<std::string, const Instance*> by_id;
  for (const Instance& i : instances) {
    by_id[i.id] = &i;
  }
  AlgoSummary s;
  for (const BenchRow& row : rows) {
    if (row.algorithm != a) {
      continue;
    }
    s.expanded.push_back(static_cast<double>(row.result.stats.states_expanded));
    ++s.outcomes[std::string(name(row.result.outcome))];
    if (row.result.outcome != Outcome::Found) {
      continue;
    }
    ++s.found;
    s.valid += row.certificate_valid ? 1 : 0;
    const Instance& inst = *by_id.at(row.instance_id);
    const double len = static_cast<double>(row.result.path.size());
    s.lengths.push_back(len);
    if (inst.distance) {
      s.distances.push_back(*inst.distance);
      s.shorter_than_oracle += len < *inst.distance ? 1 : 0;
    }
  }
  return s;
}

std::string outcome_text(const AlgoSummary& s) {
  std::string out;
  for (const auto& [k, n] : s.outcomes) {
    out += (out.empty() ? "" : " ") + k + "=" + std::to_string(n);
  }
  return out;
}

void criteria_from_pipeline(const PipelineConfig& cfg, const PipelineResult& run,
                            const fs::path& workdir) {
  // Criterion 2.
  const OracleSummary& o = run.oracle;
  const bool c2 = o.checked == cfg.oracle_examples && o.distance_ok == o.checked &&
                  o.first_ok == o.checked && o.bfs_len_ok == o.checked && o.seconds < 600.0;
  report(2, c2,
         "of " + std::to_string(o.checked) + " examples: distance " + std::to_string(o.distance_ok) +
             ", first step " + std::to_string(o.first_ok) + ", BFS length " +
             std::to_string(o.bfs_len_ok) + " agree; " + fmt(o.seconds, 1) + " s (limit 600 s)");

  // Criterion 6.
  const Evaluation& ev = run.test_eval;
  for (const DistanceRow& r : ev.per_distance) {
    detail("test d=" + std::to_string(r.distance) + " n=" + std::to_string(r.count) + " mae " +
           fmt(r.mae) + " accuracy " + fmt(r.accuracy) +
           (r.any_valid_accuracy ? " any-valid " + fmt(*r.any_valid_accuracy) : ""));
  }
  if (ev.any_valid_accuracy) {
    detail("test any-valid first-step accuracy " + fmt(*ev.any_valid_accuracy));
  }
  const bool c6 = ev.row.accuracy >= 0.375 && ev.row.mae <= 1.5 && run.train_seconds <= 7200.0 &&
                  run.dataset_size >= 50'000;
  report(6, c6,
         "M=32, " + std::to_string(run.dataset_size) + " examples, " +
             std::to_string(cfg.train.epochs) + " epochs: test accuracy " + fmt(ev.row.accuracy) +
             " (>= 0.375), MAE " + fmt(ev.row.mae) + " (<= 1.5), training " +
             fmt(run.train_seconds, 0) + " s");

  // Criterion 7.
  const AlgoSummary bfs = summarize(run.rows, run.instances, Algorithm::Bfs);
  const AlgoSummary nngs = summarize(run.rows, run.instances, Algorithm::Nngs);
  const AlgoSummary batch = summarize(run.rows, run.instances, Algorithm::BatchNngs);
  std::map<int, std::size_t> dist_counts;
  for (const Instance& i : run.instances) {
    ++dist_counts[i.distance.value_or(-1)];
  }
  std::string dtext;
  for (const auto& [d, n] : dist_counts) {
    dtext += " d" + std::to_string(d) + "=" + std::to_string(n);
  }
  detail("instances: " + std::to_string(run.instances.size()) + " held out," + dtext);
  for (const auto& [label, s] : {std::pair{"bfs", &bfs}, {"nngs", &nngs}, {"batch-nngs", &batch}}) {
    detail(std::string(label) + " states_expanded " + distribution(s->expanded) + " [" +
           outcome_text(*s) + "]");
  }
  const double m_bfs = mean(bfs.expanded);
  const double m_nngs = mean(nngs.expanded);
  const double m_batch = mean(batch.expanded);
  const bool c7 = run.instances.size() >= 100 && m_nngs < m_bfs && m_batch < m_bfs;
  report(7, c7,
         "mean states_expanded BFS " + fmt(m_bfs, 1) + ", NNGS " + fmt(m_nngs, 1) +
             ", Batch-NNGS " + fmt(m_batch, 1) + " (alpha 0.5, batch 512)");

  // Criterion 8.
  const std::size_t found = o.found + bfs.found + nngs.found + batch.found;
  const std::size_t valid = o.certificates_ok + bfs.valid + nngs.valid + batch.valid;
  const std::size_t shorter = nngs.shorter_than_oracle + batch.shorter_than_oracle +
                              bfs.shorter_than_oracle;
  const double ratio_nngs = mean(nngs.lengths) / mean(nngs.distances);
  const double ratio_batch = mean(batch.lengths) / mean(batch.distances);
  detail("mean path length: bfs " + fmt(mean(bfs.lengths)) + ", nngs " + fmt(mean(nngs.lengths)) +
         ", batch-nngs " + fmt(mean(batch.lengths)) + "; mean oracle distance " +
         fmt(mean(batch.distances)));
  const bool c8 = found == valid && shorter == 0 && ratio_nngs <= 1.5 && ratio_batch <= 1.5 &&
                  nngs.found > 0 && batch.found > 0;
  report(8, c8,
         std::to_string(valid) + "/" + std::to_string(found) + " certificates valid, " +
             std::to_string(shorter) + " paths shorter than optimal, guided/oracle length NNGS " +
             fmt(ratio_nngs) + " Batch-NNGS " + fmt(ratio_batch) + " (<= 1.5)");

  // Criterion 9.
  SearchConfig low = cfg.search;
  low.alpha = 0.1;
  const auto rows_low = bench(run.instances, {Algorithm::BatchNngs}, &run.model, low, 1);
  {
    auto f = open_out(workdir / "alpha_0.1_bench.csv");
    write_bench_csv(f, rows_low);
  }
  const AlgoSummary lo = summarize(rows_low, run.instances, Algorithm::BatchNngs);
  detail("batch-nngs alpha 0.1 states_expanded " + distribution(lo.expanded) + " [" +
         outcome_text(lo) + "]");
  detail("batch-nngs alpha 0.5 states_expanded " + distribution(batch.expanded) + " [" +
         outcome_text(batch) + "]");

  // Supplementary, report only: targets at the end of long random walks.
  {
    InstanceConfig walk = cfg.instances;
    walk.count = 200;
    walk.walk_steps = 12;
    walk.oracle_cap = 6;
    walk.seed = 8;
    const auto winst = generate_instances(walk, run.dataset_pairs);
    const auto w_hi = bench(winst, {Algorithm::BatchNngs}, &run.model, cfg.search, 1);
    const auto w_lo = bench(winst, {Algorithm::BatchNngs}, &run.model, low, 1);
    const AlgoSummary sh = summarize(w_hi, winst, Algorithm::BatchNngs);
    const AlgoSummary sl = summarize(w_lo, winst, Algorithm::BatchNngs);
    detail("report only, 200 random-walk instances: alpha 0.1 mean expanded " +
           fmt(mean(sl.expanded), 1) + " length " + fmt(mean(sl.lengths)) + "; alpha 0.5 mean expanded " +
           fmt(mean(sh.expanded), 1) + " length " + fmt(mean(sh.lengths)));
  }
  const double e_lo = mean(lo.expanded);
  const double e_hi = mean(batch.expanded);
  const double l_lo = mean(lo.lengths);
  const double l_hi = mean(batch.lengths);
  const bool c9 = e_lo <= e_hi && l_lo >= l_hi;
  report(9, c9,
         "Batch-NNGS mean states_expanded alpha 0.1 " + fmt(e_lo, 1) + " vs alpha 0.5 " + fmt(e_hi, 1) +
             " (need <=); mean path length " + fmt(l_lo) + " vs " + fmt(l_hi) + " (need >=)");
}

void criterion_determinism(const fs::path& run1, const fs::path& run2) {
  std::size_t same = 0;
  std::vector<std::string> differing;
  for (const std::string& f : kDeterministicFiles) {
    auto slurp = [](const fs::path& p) {
      std::ifstream in(p, std::ios::binary);
      return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
    };
    const std::string a = slurp(run1 / f);
    const std::string b = slurp(run2 / f);
    if (!a.empty() && a == b) {
      ++same;
    } else {
      differing.push_back(f);
    }
  }
  std::string diff_text;
  for (const auto& f : differing) {
    diff_text += " " + f;
  }
  report(10, differing.empty(),
         std::to_string(same) + "/" + std::to_string(kDeterministicFiles.size()) +
             " output files byte-identical across two runs" +
             (differing.empty() ? "" : "; differing:" + diff_text));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance suite"};
  std::string workdir = "acceptance_artifacts";
  std::vector<int> known_failures;
  bool skip_rerun = false;
  app.add_option("--workdir", workdir, "Directory for generated artifacts")->capture_default_str();
  app.add_option("--known-failures", known_failures,
                 "Criteria whose FAIL is documented and does not fail the exit status");
  app.add_flag("--skip-rerun", skip_rerun, "Run the pipeline once and skip criterion 10");
  CLI11_PARSE(app, argc, argv);

  const auto t0 = Clock::now();
  const fs::path dir(workdir);
  fs::create_directories(dir);
  try {
    criterion_soundness();
    criterion_encoder();
    criterion_batch_equivalence();
    criterion_grad_check();

    const PipelineConfig cfg = pipeline_config();
    const PipelineResult run = run_pipeline(cfg, dir / "run1", true);
    criteria_from_pipeline(cfg, run, dir);
    if (!skip_rerun) {
      run_pipeline(cfg, dir / "run2", false);
      criterion_determinism(dir / "run1", dir / "run2");
    }
  } catch (const std::exception& e) {
    std::cout << "FAIL aborted: " << e.what() << std::endl;
    return 1;
  }

  std::sort(g_verdicts.begin(), g_verdicts.end(),
            [](const CriterionResult& a, const CriterionResult& b) { return a.id < b.id; });
  std::cout << "\nsummary (" << fmt(seconds_since(t0), 0) << " s)\n";
  std::ofstream saved(dir / "summary.txt");
  int unexpected = 0;
  for (const CriterionResult& v : g_verdicts) {
    const bool known = std::find(known_failures.begin(), known_failures.end(), v.id) !=
                       known_failures.end();
    std::cout << (v.pass ? "PASS" : "FAIL") << " criterion " << v.id
              << (!v.pass && known ? " (known failure)" : "") << '\n';
    saved << (v.pass ? "PASS" : "FAIL") << " criterion " << v.id << ": " << v.summary << '\n';
    if (!v.pass && !known) {
      ++unexpected;
    }
  }
  return unexpected == 0 ? 0 : 1;
}
