#pragma once

#include <chrono>
#include <cstddef>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "nngs/expr.hpp"
#include "nngs/model.hpp"
#include "nngs/rewrite.hpp"

namespace nngs {

struct SearchConfig {
  double alpha = 0.5;
  std::size_t batch_size = 512;
  std::optional<std::chrono::milliseconds> timeout;
  // Search stops with ResourceLimit once this many states are visited.
  std::size_t max_visited = 5'000'000;
  // Called once per expanded state, for instrumentation.
  std::function<void(const Expr&)> on_expand;
};

// Throws DomainError for alpha < 0 or batch_size < 8.
void validate(const SearchConfig& cfg);

enum class Outcome { Found, Timeout, Exhausted, ResourceLimit };

std::string_view name(Outcome o);

struct SearchStats {
  // States whose successors were generated (or, for NNGS, that had at least
  // one transformation tried).
  std::size_t states_expanded = 0;
  // Distinct states entered into the visited set, the source included.
  std::size_t states_generated = 0;
  // Model invocations on search states.
  std::size_t nn_batches = 0;
  double elapsed_ms = 0.0;
};

struct SearchResult {
  Outcome outcome = Outcome::Exhausted;
  RewritePath path;  // meaningful when Found
  SearchStats stats;
};

// distance estimate + alpha * depth
constexpr double priority(double estimate, int depth, double alpha) {
  return estimate + alpha * static_cast<double>(depth);
}

// Maximum number of states moved from the reserve to the main queue at once.
constexpr std::size_t transfer_limit(std::size_t batch_size) {
  return batch_size / kTransformationCount;
}

SearchResult bfs_search(const Expr& source, const Expr& target, const SearchConfig& cfg);
SearchResult nngs_search(const Expr& source, const Expr& target, const Model& model,
                         const SearchConfig& cfg);
SearchResult batch_nngs_search(const Expr& source, const Expr& target, const Model& model,
                               const SearchConfig& cfg);

enum class Algorithm { Bfs, Nngs, BatchNngs };

std::string_view name(Algorithm a);
// Accepts bfs, nngs, batch-nngs; throws DomainError otherwise.
Algorithm algorithm_from_name(std::string_view name);

// `model` may be null only for Bfs.
SearchResult run_search(Algorithm algo, const Expr& source, const Expr& target, const Model* model,
                        const SearchConfig& cfg);

struct Instance {
  std::string id;
  Expr source;
  Expr target;
  std::optional<int> distance;  // oracle distance when known
};

// `<id>\t<distance or ->\t<source>\t<target>` per line; `#` starts a comment.
void write_instances(std::ostream& out, const std::vector<Instance>& instances);
std::vector<Instance> read_instances(std::istream& in);
std::vector<Instance> read_instances_file(const std::string& file);

struct InstanceConfig {
  std::size_t count = 100;
  int height_lo = 4;
  int height_hi = 6;
  std::uint64_t seed = 2;
  // Random steps applied to a fresh expression to obtain a source.
  int source_walk_max = 8;
  // When positive, the target ends a random walk of 1..walk_steps steps from
  // the source and its distance is computed only up to oracle_cap. Otherwise
  // the target is drawn at an exact distance in [min_distance, max_distance],
  // cycling through the distances.
  int walk_steps = 0;
  int oracle_cap = 8;
  int min_distance = 6;
  int max_distance = 8;
  std::size_t ball_capacity = 2'000'000;
  std::size_t max_sources = 1'000'000;
};

// Instances named i0, i1, ... Pairs whose `source|target` prefix key appears
// in `exclude` are skipped, as are repeats. Throws ResourceLimit when
// max_sources is reached first.
std::vector<Instance> generate_instances(const InstanceConfig& cfg,
                                         const std::unordered_set<std::string>& exclude = {});

// `source|target` key used by the exclusion set.
std::string pair_key(const Expr& source, const Expr& target);

struct BenchRow {
  std::string instance_id;
  Algorithm algorithm = Algorithm::Bfs;
  SearchResult result;
  // Outcome of re-checking a Found path; false also for non-Found rows.
  bool certificate_valid = false;
};

// One row per (instance, algorithm) in input order. Found paths are
// re-validated with check_certificate. Instances run on `jobs` threads.
std::vector<BenchRow> bench(const std::vector<Instance>& instances,
                            const std::vector<Algorithm>& algos, const Model* model,
                            const SearchConfig& cfg, std::size_t jobs = 1);

// `instance_id,algorithm,outcome,path_len,states_expanded,states_generated,nn_batches,elapsed_ms`
// A Found row whose certificate failed is written with outcome Invalid.
void write_bench_csv(std::ostream& out, const std::vector<BenchRow>& rows);

struct CurvePoint {
  Algorithm algorithm;
  double time_ms;
  std::size_t solved;
};

// Cumulative number of valid Found rows per algorithm as a function of the
// time budget, one point per solve.
std::vector<CurvePoint> solve_curves(const std::vector<BenchRow>& rows,
                                     const std::vector<Algorithm>& algos);
// `algorithm,time_ms,solved`
void write_curves_csv(std::ostream& out, const std::vector<CurvePoint>& points);

}  // namespace nngs
