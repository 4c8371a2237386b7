#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "nngs/expr.hpp"
#include "nngs/rewrite.hpp"

namespace nngs {

inline constexpr std::size_t kDefaultVisitedCapacity = 20'000'000;

// Exact rewrite distance by layered breadth-first search. Returns nullopt when
// the target is farther than max_depth. Throws ResourceLimit when more than
// `capacity` expressions would be visited.
std::optional<int> bfs_distance(const Expr& source, const Expr& target, int max_depth,
                                std::size_t capacity = kDefaultVisitedCapacity);

// First steps of every shortest path from source to target. Throws Unreachable
// when the distance exceeds max_depth and DomainError when source == target.
TransformationSet shortest_first_transformations(const Expr& source, const Expr& target,
                                                 int max_depth,
                                                 std::size_t capacity = kDefaultVisitedCapacity);

// Every expression within max_depth of a source, with its exact distance and
// the set of first steps over all shortest paths reaching it.
class DistanceBall {
 public:
  struct Entry {
    int distance = 0;
    TransformationSet firsts;
  };

  static DistanceBall explore(const Expr& source, int max_depth,
                              std::size_t capacity = kDefaultVisitedCapacity);

  // Layers point into the entry table, so the ball is move-only.
  DistanceBall(DistanceBall&&) = default;
  DistanceBall& operator=(DistanceBall&&) = default;
  DistanceBall(const DistanceBall&) = delete;
  DistanceBall& operator=(const DistanceBall&) = delete;

  const Expr& source() const { return *layers_.front().front(); }
  int max_depth() const { return static_cast<int>(layers_.size()) - 1; }
  // Expressions at exactly distance d, in discovery order.
  const std::vector<const Expr*>& layer(int d) const { return layers_.at(static_cast<std::size_t>(d)); }
  const Entry* find(const Expr& e) const;
  std::size_t size() const { return entries_.size(); }

 private:
  DistanceBall() = default;

  std::unordered_map<Expr, Entry> entries_;
  std::vector<std::vector<const Expr*>> layers_;
};

// Applies `steps` transformations, each drawn uniformly from the applicable ones.
Expr random_walk(Expr e, int steps, Rng& rng);

struct Example {
  Expr source;
  Expr target;
  int distance = 0;
  Transformation first = Transformation::Commute;

  friend bool operator==(const Example&, const Example&) = default;
};

enum class Split { Train, Validation, Test };
std::string_view name(Split s);

struct Dataset {
  std::vector<Example> examples;
  Split split = Split::Train;
};

struct GenerationConfig {
  int min_distance = 1;
  int max_distance = 6;
  std::size_t per_cell = 100;
  int height_lo = 3;
  int height_hi = 5;
  std::uint64_t seed = 1;
  // Random transformations applied to a fresh root-focused expression to
  // obtain a source, drawn uniformly from [0, walk_max].
  int walk_max = 8;
  // Accepted examples per (source, distance) pair.
  std::size_t per_source_layer = 2;
  // Candidates inspected per (source, distance) pair before moving on.
  std::size_t candidates_per_layer = 64;
  // Upper bound on sampled sources; cells still short afterwards are reported.
  std::size_t max_sources = 1'000'000;
  std::size_t ball_capacity = 2'000'000;
};

struct CellShortfall {
  int distance;
  Transformation first;
  std::size_t have;
  std::size_t want;
};

struct GenerationResult {
  // Ordered by (distance, first), then by acceptance order within a cell.
  std::vector<Example> examples;
  std::size_t sources_used = 0;
  std::vector<CellShortfall> shortfalls;
};

GenerationResult generate_dataset(const GenerationConfig& cfg);

struct SplitRatios {
  double train = 0.9;
  double validation = 0.05;
  double test = 0.05;
};

// Stratified split: each (distance, first) cell is shuffled and divided by the
// ratios, so the balance of the full set carries over to every split.
std::array<Dataset, 3> split_dataset(const std::vector<Example>& examples, const SplitRatios& ratios,
                                     std::uint64_t seed);

struct DatasetStats {
  std::size_t count = 0;
  // Computed over sources and targets together; absent for an empty dataset.
  std::optional<double> avg_length;
  std::optional<std::size_t> min_length;
  std::optional<std::size_t> max_length;
  std::optional<double> avg_height;
  std::optional<int> min_height;
  std::optional<int> max_height;
};

DatasetStats dataset_stats(const Dataset& d);

// Rows named like the data-statistics table, one column per dataset.
void write_stats_csv(std::ostream& out, const std::vector<std::pair<std::string, DatasetStats>>& cols);

// `<distance>\t<first-name>\t<source-sexpr>\t<target-sexpr>` per line.
void write_examples(std::ostream& out, const std::vector<Example>& examples);
std::vector<Example> read_examples(std::istream& in);
std::vector<Example> read_examples_file(const std::string& file);

}  // namespace nngs
