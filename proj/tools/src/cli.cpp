#include "nngs_cli/cli.hpp"

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include <CLI11.hpp>

#include "nngs/errors.hpp"
#include "nngs/expr.hpp"
#include "nngs/model.hpp"
#include "nngs/oracle.hpp"
#include "nngs/rewrite.hpp"
#include "nngs/search.hpp"
#include "nngs/trainer.hpp"
#include "nngs_cli/manifest.hpp"

namespace nngs::cli {

namespace fs = std::filesystem;

namespace {

struct UsageError : Error {
  using Error::Error;
};

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> parts;
  std::string part;
  std::istringstream in(text);
  while (std::getline(in, part, sep)) {
    parts.push_back(part);
  }
  if (!text.empty() && text.back() == sep) {
    parts.emplace_back();
  }
  return parts;
}

template <class T>
T parse_number(const std::string& s, const char* what) {
  T v{};
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw UsageError(std::string("bad ") + what + ": '" + s + "'");
  }
  return v;
}

std::pair<int, int> parse_range(const std::string& s) {
  const auto parts = split(s, ':');
  if (parts.size() != 2) {
    throw UsageError("expected LO:HI, got '" + s + "'");
  }
  return {parse_number<int>(parts[0], "range bound"), parse_number<int>(parts[1], "range bound")};
}

SplitRatios parse_ratios(const std::string& s) {
  const auto parts = split(s, ':');
  if (parts.size() != 3) {
    throw UsageError("expected TRAIN:VAL:TEST ratios, got '" + s + "'");
  }
  return {parse_number<double>(parts[0], "ratio"), parse_number<double>(parts[1], "ratio"),
          parse_number<double>(parts[2], "ratio")};
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) {
    throw FormatError("cannot write " + path);
  }
  return out;
}

std::optional<std::chrono::milliseconds> timeout_from_seconds(double seconds) {
  if (seconds < 0) {
    throw UsageError("timeout must be non-negative");
  }
  if (seconds == 0) {
    return std::nullopt;
  }
  return std::chrono::milliseconds(static_cast<std::int64_t>(seconds * 1000.0));
}

// ---------------------------------------------------------------- gen-data

struct GenDataOpts {
  int min_distance = 1;
  int max_distance = 6;
  std::size_t per_cell = 100;
  std::string height = "4:6";
  std::uint64_t seed = 1;
  int walk_max = 8;
  std::size_t per_source_layer = 2;
  std::string split = "0.9:0.05:0.05";
  std::string out;
  bool audit = false;
};

int gen_data(const GenDataOpts& o, const std::vector<std::string>& args, std::ostream& out,
             std::ostream& err) {
  GenerationConfig g;
  g.min_distance = o.min_distance;
  g.max_distance = o.max_distance;
  g.per_cell = o.per_cell;
  std::tie(g.height_lo, g.height_hi) = parse_range(o.height);
  g.seed = o.seed;
  g.walk_max = o.walk_max;
  g.per_source_layer = o.per_source_layer;
  const SplitRatios ratios = parse_ratios(o.split);

  Manifest manifest("gen-data", args);
  manifest.config() = {{"min_distance", g.min_distance}, {"max_distance", g.max_distance},
                       {"per_cell", g.per_cell},         {"height", o.height},
                       {"walk_max", g.walk_max},         {"per_source_layer", g.per_source_layer},
                       {"split", o.split},               {"audit", o.audit}};
  manifest.seed("seed", g.seed);

  const GenerationResult gen = generate_dataset(g);
  const auto splits = split_dataset(gen.examples, ratios, g.seed);

  fs::create_directories(o.out);
  std::vector<std::pair<std::string, DatasetStats>> stats;
  for (const Dataset& d : splits) {
    const std::string path = (fs::path(o.out) / (std::string(name(d.split)) + ".tsv")).string();
    auto f = open_out(path);
    write_examples(f, d.examples);
    manifest.output(path);
    stats.emplace_back(std::string(name(d.split)), dataset_stats(d));
  }
  const std::string stats_path = (fs::path(o.out) / "stats.csv").string();
  {
    auto f = open_out(stats_path);
    write_stats_csv(f, stats);
  }
  manifest.output(stats_path);
  manifest.results()["examples"] = gen.examples.size();
  manifest.results()["sources_used"] = gen.sources_used;
  manifest.results()["shortfall_cells"] = gen.shortfalls.size();

  out << "examples " << gen.examples.size() << " (train " << splits[0].examples.size()
      << ", validation " << splits[1].examples.size() << ", test " << splits[2].examples.size()
      << ") from " << gen.sources_used << " sources\n";

  int status = kOk;
  if (o.audit) {
    std::size_t exact = 0;
    for (const Example& ex : gen.examples) {
      const auto d = bfs_distance(ex.source, ex.target, ex.distance);
      const bool first_ok =
          d && *d == ex.distance &&
          shortest_first_transformations(ex.source, ex.target, ex.distance).contains(ex.first);
      exact += first_ok ? 1 : 0;
    }
    out << "audit " << exact << "/" << gen.examples.size() << " exact\n";
    manifest.results()["audit_exact"] = exact;
    if (exact != gen.examples.size()) {
      err << "audit failed: " << gen.examples.size() - exact << " examples disagree with BFS\n";
      status = kUsage;
    }
  }
  for (const CellShortfall& s : gen.shortfalls) {
    err << "shortfall: distance " << s.distance << " first " << name(s.first) << " has " << s.have
        << " of " << s.want << '\n';
  }
  if (!gen.shortfalls.empty()) {
    err << "generation failed to fill " << gen.shortfalls.size() << " cells\n";
    status = kUsage;
  }
  const std::string manifest_path = (fs::path(o.out) / "manifest.json").string();
  manifest.write(manifest_path);
  return status;
}

// ------------------------------------------------------------------- train

struct TrainOpts {
  std::string data;
  int epochs = 5;
  std::size_t batch_size = 128;
  std::size_t memory_dim = 32;
  std::uint64_t seed = 1;
  double lr = 1e-3;
  double clip_norm = 0.0;
  std::string out;
  std::string metrics;
  bool no_train_eval = false;
};

void print_row(std::ostream& out, const MetricRow& r) {
  out << "epoch " << r.epoch << ' ' << r.split << " mae " << r.mae << " accuracy " << r.accuracy
      << " dmse " << r.dmse << " dce " << r.dce << '\n';
}

int train_cmd(const TrainOpts& o, const std::vector<std::string>& args, std::ostream& out,
              std::ostream& err) {
  const std::string train_path = (fs::path(o.data) / "train.tsv").string();
  const std::string val_path = (fs::path(o.data) / "validation.tsv").string();
  const std::string test_path = (fs::path(o.data) / "test.tsv").string();
  const auto train_set = read_examples_file(train_path);
  const auto val_set = read_examples_file(val_path);

  TrainConfig tc;
  tc.epochs = o.epochs;
  tc.batch_size = o.batch_size;
  tc.seed = o.seed;
  tc.adam.lr = o.lr;
  if (o.clip_norm > 0) {
    tc.clip_norm = o.clip_norm;
  }
  tc.eval_train = !o.no_train_eval;
  validate(tc);
  ModelConfig mc;
  mc.memory_dim = o.memory_dim;

  const std::string metrics_path = o.metrics.empty() ? o.out + ".metrics.csv" : o.metrics;
  Manifest manifest("train", args);
  manifest.config() = {{"epochs", tc.epochs},       {"batch_size", tc.batch_size},
                       {"memory_dim", mc.memory_dim}, {"hidden", mc.hidden},
                       {"lr", tc.adam.lr},          {"beta1", tc.adam.beta1},
                       {"beta2", tc.adam.beta2},    {"eps", tc.adam.eps},
                       {"clip_norm", o.clip_norm},  {"eval_train", tc.eval_train}};
  manifest.seed("seed", tc.seed);
  manifest.input(train_path);
  manifest.input(val_path);

  Model model = Model::initialized(mc, tc.seed);
  int status = kOk;
  TrainResult result;
  try {
    result = train(train_set, val_set, tc, model, [&](const MetricRow& r) { print_row(out, r); });
  } catch (const TrainingDiverged& e) {
    err << e.what() << "; saving the last finite parameters\n";
    status = kUsage;
  }
  save_model(model, o.out);
  manifest.output(o.out);
  {
    auto f = open_out(metrics_path);
    write_metrics_csv(f, result.metrics);
  }
  manifest.output(metrics_path);
  if (status == kOk && fs::exists(test_path)) {
    const auto test_set = read_examples_file(test_path);
    if (!test_set.empty()) {
      const Evaluation ev = evaluate(test_set, model, tc.epochs, "test");
      print_row(out, ev.row);
      manifest.input(test_path);
      manifest.results()["test"] = {{"mae", ev.row.mae}, {"accuracy", ev.row.accuracy}};
    }
  }
  manifest.results()["optimizer_steps"] = result.optimizer_steps;
  manifest.write(o.out + ".manifest.json");
  return status;
}

// ---------------------------------------------------------------- evaluate

struct EvaluateOpts {
  std::string model;
  std::string data;
  bool any_valid = false;
  std::string per_distance;
};

int evaluate_cmd(const EvaluateOpts& o, const std::vector<std::string>& args, std::ostream& out) {
  const Model model = load_model(o.model);
  const auto examples = read_examples_file(o.data);
  std::vector<TransformationSet> firsts;
  if (o.any_valid) {
    firsts.reserve(examples.size());
    for (const Example& ex : examples) {
      firsts.push_back(shortest_first_transformations(ex.source, ex.target, ex.distance));
    }
  }
  const Evaluation ev = evaluate(examples, model, 0, fs::path(o.data).stem().string(), firsts);
  print_row(out, ev.row);
  if (ev.any_valid_accuracy) {
    out << "any_valid_accuracy " << *ev.any_valid_accuracy << '\n';
  }
  if (o.per_distance.empty()) {
    write_per_distance_csv(out, ev.per_distance);
    return kOk;
  }
  Manifest manifest("evaluate", args);
  manifest.config() = {{"any_valid", o.any_valid}};
  manifest.input(o.model);
  manifest.input(o.data);
  {
    auto f = open_out(o.per_distance);
    write_per_distance_csv(f, ev.per_distance);
  }
  manifest.output(o.per_distance);
  manifest.results() = {{"mae", ev.row.mae}, {"accuracy", ev.row.accuracy}};
  manifest.write(o.per_distance + ".manifest.json");
  return kOk;
}

// ------------------------------------------------------------------ search

struct SearchOpts {
  std::string model;
  std::string algo = "batch-nngs";
  double alpha = 0.5;
  std::size_t batch_size = 512;
  double timeout = 60.0;
  std::size_t max_visited = 5'000'000;
  std::string source;
  std::string target;
  std::string emit_path;
};

SearchConfig search_config(double alpha, std::size_t batch_size, double timeout,
                           std::size_t max_visited) {
  SearchConfig cfg;
  cfg.alpha = alpha;
  cfg.batch_size = batch_size;
  cfg.timeout = timeout_from_seconds(timeout);
  cfg.max_visited = max_visited;
  validate(cfg);
  return cfg;
}

int search_cmd(const SearchOpts& o, const std::vector<std::string>& args, std::ostream& out) {
  const Algorithm algo = algorithm_from_name(o.algo);
  const Expr source = parse(o.source);
  const Expr target = parse(o.target);
  const SearchConfig cfg = search_config(o.alpha, o.batch_size, o.timeout, o.max_visited);
  std::optional<Model> model;
  if (algo != Algorithm::Bfs) {
    if (o.model.empty()) {
      throw UsageError(std::string(name(algo)) + " requires --model");
    }
    model = load_model(o.model);
  }
  const SearchResult r = run_search(algo, source, target, model ? &*model : nullptr, cfg);
  out << "outcome " << name(r.outcome) << '\n';
  out << "states_expanded " << r.stats.states_expanded << '\n';
  out << "states_generated " << r.stats.states_generated << '\n';
  out << "nn_batches " << r.stats.nn_batches << '\n';
  out << "elapsed_ms " << r.stats.elapsed_ms << '\n';
  if (r.outcome != Outcome::Found) {
    return kNotFound;
  }
  out << "path_len " << r.path.size() << '\n';
  out << "path";
  for (Transformation t : r.path) {
    out << ' ' << name(t);
  }
  out << '\n';
  if (!o.emit_path.empty()) {
    {
      auto f = open_out(o.emit_path);
      write_path(f, r.path);
    }
    Manifest manifest("search", args);
    manifest.config() = {{"algo", o.algo},           {"alpha", cfg.alpha},
                         {"batch_size", cfg.batch_size}, {"timeout_s", o.timeout},
                         {"max_visited", cfg.max_visited}, {"source", o.source},
                         {"target", o.target}};
    if (model) {
      manifest.input(o.model);
    }
    manifest.output(o.emit_path);
    manifest.results() = {{"outcome", name(r.outcome)},
                          {"path_len", r.path.size()},
                          {"states_expanded", r.stats.states_expanded},
                          {"states_generated", r.stats.states_generated}};
    manifest.write(o.emit_path + ".manifest.json");
  }
  return kOk;
}

// ------------------------------------------------------------------- check

struct CheckOpts {
  std::string source;
  std::string target;
  std::string path;
};

int check_cmd(const CheckOpts& o, std::ostream& out) {
  const Expr source = parse(o.source);
  const Expr target = parse(o.target);
  const RewritePath path = read_path_file(o.path);
  const Verdict v = check_certificate(source, target, path);
  if (v.valid) {
    out << "Valid\n";
    return kOk;
  }
  out << "Invalid(" << v.reason << ")\n";
  return kInvalidCertificate;
}

// ------------------------------------------------------------------- bench

struct BenchOpts {
  std::string model;
  std::string instances;
  std::string algos = "bfs,nngs,batch-nngs";
  double alpha = 0.5;
  std::size_t batch_size = 512;
  double timeout = 60.0;
  std::size_t max_visited = 5'000'000;
  std::size_t jobs = 1;
  std::string out;
  std::string curves;
};

int bench_cmd(const BenchOpts& o, const std::vector<std::string>& args, std::ostream& out) {
  std::vector<Algorithm> algos;
  for (const std::string& a : split(o.algos, ',')) {
    algos.push_back(algorithm_from_name(a));
  }
  if (algos.empty()) {
    throw UsageError("--algos lists no algorithm");
  }
  const auto instances = read_instances_file(o.instances);
  const SearchConfig cfg = search_config(o.alpha, o.batch_size, o.timeout, o.max_visited);
  const bool needs_model =
      std::any_of(algos.begin(), algos.end(), [](Algorithm a) { return a != Algorithm::Bfs; });
  std::optional<Model> model;
  if (needs_model) {
    if (o.model.empty()) {
      throw UsageError("guided algorithms require --model");
    }
    model = load_model(o.model);
  }
  const auto rows = bench(instances, algos, model ? &*model : nullptr, cfg, o.jobs);
  {
    auto f = open_out(o.out);
    write_bench_csv(f, rows);
  }
  const std::string curves_path = o.curves.empty() ? o.out + ".curves.csv" : o.curves;
  {
    auto f = open_out(curves_path);
    write_curves_csv(f, solve_curves(rows, algos));
  }

  Manifest manifest("bench", args);
  manifest.config() = {{"algos", o.algos},
                       {"alpha", cfg.alpha},
                       {"batch_size", cfg.batch_size},
                       {"timeout_s", o.timeout},
                       {"max_visited", cfg.max_visited},
                       {"jobs", o.jobs}};
  manifest.input(o.instances);
  if (model) {
    manifest.input(o.model);
  }
  manifest.output(o.out);
  manifest.output(curves_path);

  std::size_t invalid = 0;
  for (Algorithm a : algos) {
    std::size_t solved = 0;
    std::size_t n = 0;
    double expanded = 0;
    for (const BenchRow& row : rows) {
      if (row.algorithm != a) {
        continue;
      }
      ++n;
      expanded += static_cast<double>(row.result.stats.states_expanded);
      if (row.result.outcome == Outcome::Found) {
        if (row.certificate_valid) {
          ++solved;
        } else {
          ++invalid;
        }
      }
    }
    const double mean = n ? expanded / static_cast<double>(n) : 0.0;
    out << name(a) << " solved " << solved << "/" << n << " mean_states_expanded " << mean << '\n';
    manifest.results()[std::string(name(a))] = {{"solved", solved},
                                                {"instances", n},
                                                {"mean_states_expanded", mean}};
  }
  manifest.results()["invalid_certificates"] = invalid;
  manifest.write(o.out + ".manifest.json");
  return invalid == 0 ? kOk : kInvalidCertificate;
}

// ----------------------------------------------------------- gen-instances

struct GenInstancesOpts {
  std::size_t count = 100;
  std::string height = "4:6";
  std::uint64_t seed = 2;
  int source_walk_max = 8;
  int walk_steps = 0;
  int oracle_cap = 8;
  std::string distance = "6:8";
  std::vector<std::string> exclude;
  std::string out;
};

int gen_instances_cmd(const GenInstancesOpts& o, const std::vector<std::string>& args,
                      std::ostream& out) {
  InstanceConfig ic;
  ic.count = o.count;
  std::tie(ic.height_lo, ic.height_hi) = parse_range(o.height);
  ic.seed = o.seed;
  ic.source_walk_max = o.source_walk_max;
  ic.walk_steps = o.walk_steps;
  ic.oracle_cap = o.oracle_cap;
  std::tie(ic.min_distance, ic.max_distance) = parse_range(o.distance);

  Manifest manifest("gen-instances", args);
  manifest.config() = {{"count", ic.count},       {"height", o.height},
                       {"source_walk_max", ic.source_walk_max}, {"walk_steps", ic.walk_steps},
                       {"oracle_cap", ic.oracle_cap}, {"distance", o.distance}};
  manifest.seed("seed", ic.seed);

  std::unordered_set<std::string> excluded;
  for (const std::string& path : o.exclude) {
    for (const Example& ex : read_examples_file(path)) {
      excluded.insert(pair_key(ex.source, ex.target));
    }
    manifest.input(path);
  }
  const auto instances = generate_instances(ic, excluded);
  {
    auto f = open_out(o.out);
    write_instances(f, instances);
  }
  manifest.output(o.out);
  manifest.results()["instances"] = instances.size();
  manifest.write(o.out + ".manifest.json");
  out << "instances " << instances.size() << '\n';
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Expression rewrite prover with neural-network guided search", "nngs"};
  app.require_subcommand(1);
  app.set_version_flag("--version", NNGS_VERSION);

  GenDataOpts gd;
  auto* c_gen = app.add_subcommand("gen-data", "Generate a balanced labelled dataset");
  c_gen->add_option("--min-distance", gd.min_distance, "Smallest rewrite distance")->capture_default_str();
  c_gen->add_option("--max-distance", gd.max_distance, "Largest rewrite distance")->capture_default_str();
  c_gen->add_option("--per-cell", gd.per_cell, "Examples per (distance, first step) cell")->capture_default_str();
  c_gen->add_option("--height", gd.height, "Source height range LO:HI")->capture_default_str();
  c_gen->add_option("--seed", gd.seed, "Random seed")->capture_default_str();
  c_gen->add_option("--walk-max", gd.walk_max, "Longest random walk that places the source focus")->capture_default_str();
  c_gen->add_option("--per-source-layer", gd.per_source_layer, "Examples taken per source and distance")->capture_default_str();
  c_gen->add_option("--split", gd.split, "Split ratios TRAIN:VAL:TEST")->capture_default_str();
  c_gen->add_option("--out", gd.out, "Output directory")->required();
  c_gen->add_flag("--audit", gd.audit, "Re-derive every label with BFS");

  TrainOpts tr;
  auto* c_train = app.add_subcommand("train", "Train the distance and transformation model");
  c_train->add_option("--data", tr.data, "Dataset directory")->required();
  c_train->add_option("--epochs", tr.epochs, "Epochs")->capture_default_str();
  c_train->add_option("--batch-size", tr.batch_size, "Examples per optimizer step")->capture_default_str();
  c_train->add_option("--memory-dim", tr.memory_dim, "Tree-LSTM memory dimension")->capture_default_str();
  c_train->add_option("--seed", tr.seed, "Initialization and shuffling seed")->capture_default_str();
  c_train->add_option("--lr", tr.lr, "Adam learning rate")->capture_default_str();
  c_train->add_option("--clip-norm", tr.clip_norm, "Gradient norm cap (0 disables)")->capture_default_str();
  c_train->add_option("--metrics", tr.metrics, "Metrics CSV (default OUT.metrics.csv)");
  c_train->add_flag("--no-train-eval", tr.no_train_eval, "Skip per-epoch metrics on the training split");
  c_train->add_option("--out", tr.out, "Model file")->required();

  EvaluateOpts ev;
  auto* c_eval = app.add_subcommand("evaluate", "Evaluate a model on a dataset file");
  c_eval->add_option("--model", ev.model, "Model file")->required();
  c_eval->add_option("--data", ev.data, "Dataset TSV")->required();
  c_eval->add_flag("--any-valid", ev.any_valid, "Also score against every shortest-path first step");
  c_eval->add_option("--per-distance", ev.per_distance, "Per-distance CSV (default stdout)");

  SearchOpts so;
  auto* c_search = app.add_subcommand("search", "Search for a rewrite path");
  c_search->add_option("--model", so.model, "Model file (not needed for bfs)");
  c_search->add_option("--algo", so.algo, "bfs, nngs or batch-nngs")->capture_default_str();
  c_search->add_option("--alpha", so.alpha, "Depth penalty")->capture_default_str();
  c_search->add_option("--batch-size", so.batch_size, "Batch-NNGS batch size")->capture_default_str();
  c_search->add_option("--timeout", so.timeout, "Seconds (0 disables)")->capture_default_str();
  c_search->add_option("--max-visited", so.max_visited, "Visited-state cap")->capture_default_str();
  c_search->add_option("--source", so.source, "Source expression")->required();
  c_search->add_option("--target", so.target, "Target expression")->required();
  c_search->add_option("--emit-path", so.emit_path, "Write the found path to this file");

  CheckOpts ck;
  auto* c_check = app.add_subcommand("check", "Validate a rewrite-path certificate");
  c_check->add_option("--source", ck.source, "Source expression")->required();
  c_check->add_option("--target", ck.target, "Target expression")->required();
  c_check->add_option("--path", ck.path, "Path file")->required();

  BenchOpts bo;
  auto* c_bench = app.add_subcommand("bench", "Run algorithms over an instance file");
  c_bench->add_option("--model", bo.model, "Model file (not needed for bfs only)");
  c_bench->add_option("--instances", bo.instances, "Instance file")->required();
  c_bench->add_option("--algos", bo.algos, "Comma-separated algorithms")->capture_default_str();
  c_bench->add_option("--alpha", bo.alpha, "Depth penalty")->capture_default_str();
  c_bench->add_option("--batch-size", bo.batch_size, "Batch-NNGS batch size")->capture_default_str();
  c_bench->add_option("--timeout", bo.timeout, "Seconds per search (0 disables)")->capture_default_str();
  c_bench->add_option("--max-visited", bo.max_visited, "Visited-state cap")->capture_default_str();
  c_bench->add_option("--jobs", bo.jobs, "Instances searched concurrently")->capture_default_str();
  c_bench->add_option("--out", bo.out, "Report CSV")->required();
  c_bench->add_option("--curves", bo.curves, "Solve-curve CSV (default OUT.curves.csv)");

  GenInstancesOpts gi;
  auto* c_inst = app.add_subcommand("gen-instances", "Generate search instances");
  c_inst->add_option("--count", gi.count, "Number of instances")->capture_default_str();
  c_inst->add_option("--height", gi.height, "Source height range LO:HI")->capture_default_str();
  c_inst->add_option("--seed", gi.seed, "Random seed")->capture_default_str();
  c_inst->add_option("--source-walk-max", gi.source_walk_max, "Longest walk placing the source focus")->capture_default_str();
  c_inst->add_option("--walk-steps", gi.walk_steps, "Target by random walk of up to this many steps (0: exact distance)")->capture_default_str();
  c_inst->add_option("--oracle-cap", gi.oracle_cap, "Deepest BFS used to label walk instances")->capture_default_str();
  c_inst->add_option("--distance", gi.distance, "Exact distance range LO:HI")->capture_default_str();
  c_inst->add_option("--exclude", gi.exclude, "Dataset TSVs whose pairs are skipped")->delimiter(',');
  c_inst->add_option("--out", gi.out, "Instance file")->required();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (c_gen->parsed()) {
      return gen_data(gd, args, out, err);
    }
    if (c_train->parsed()) {
      return train_cmd(tr, args, out, err);
    }
    if (c_eval->parsed()) {
      return evaluate_cmd(ev, args, out);
    }
    if (c_search->parsed()) {
      return search_cmd(so, args, out);
    }
    if (c_check->parsed()) {
      return check_cmd(ck, out);
    }
    if (c_bench->parsed()) {
      return bench_cmd(bo, args, out);
    }
    if (c_inst->parsed()) {
      return gen_instances_cmd(gi, args, out);
    }
  } catch (const SyntaxError& e) {
    err << "SyntaxError: " << e.what() << '\n';
    return kUsage;
  } catch (const FocusCountError& e) {
    err << "FocusCountError: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  }
  return kUsage;
}

}  // namespace nngs::cli
