#include "nngs/search.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <deque>
#include <fstream>
#include <istream>
#include <mutex>
#include <ostream>
#include <queue>
#include <thread>
#include <unordered_map>

#include "nngs/errors.hpp"
#include "nngs/oracle.hpp"
#include "nngs/rng.hpp"
#include "nngs/tensor.hpp"

namespace nngs {

void validate(const SearchConfig& cfg) {
  if (!(cfg.alpha >= 0.0)) {
    throw DomainError("alpha must be non-negative");
  }
  if (cfg.batch_size < kTransformationCount) {
    throw DomainError("batch size must be at least 8");
  }
  if (cfg.max_visited < 1) {
    throw DomainError("max_visited must be positive");
  }
}

std::string_view name(Outcome o) {
  switch (o) {
    case Outcome::Found:
      return "Found";
    case Outcome::Timeout:
      return "Timeout";
    case Outcome::Exhausted:
      return "Exhausted";
    case Outcome::ResourceLimit:
      return "ResourceLimit";
  }
  return "?";
}

std::string_view name(Algorithm a) {
  switch (a) {
    case Algorithm::Bfs:
      return "bfs";
    case Algorithm::Nngs:
      return "nngs";
    case Algorithm::BatchNngs:
      return "batch-nngs";
  }
  return "?";
}

Algorithm algorithm_from_name(std::string_view n) {
  if (n == "bfs") {
    return Algorithm::Bfs;
  }
  if (n == "nngs") {
    return Algorithm::Nngs;
  }
  if (n == "batch-nngs") {
    return Algorithm::BatchNngs;
  }
  throw DomainError("unknown algorithm '" + std::string(n) + "'");
}

namespace {

using Clock = std::chrono::steady_clock;

class Timer {
 public:
  explicit Timer(std::optional<std::chrono::milliseconds> timeout) : start_(Clock::now()) {
    if (timeout) {
      deadline_ = start_ + *timeout;
    }
  }
  bool expired() const { return deadline_ && Clock::now() >= *deadline_; }
  double elapsed_ms() const {
    return std::chrono::duration<double, std::milli>(Clock::now() - start_).count();
  }

 private:
  Clock::time_point start_;
  std::optional<Clock::time_point> deadline_;
};

// Visited set plus the search tree used to rebuild paths.
class SearchTree {
 public:
  struct Node {
    const Expr* expr;
    std::uint32_t parent;
    Transformation via;
    int depth;
  };

  explicit SearchTree(const Expr& root) { add(root, 0, Transformation::Commute, true); }

  // Index of the new node, or nullopt when e was already visited.
  std::optional<std::uint32_t> add(const Expr& e, std::uint32_t parent, Transformation via,
                                   bool root = false) {
    const auto id = static_cast<std::uint32_t>(nodes_.size());
    auto [it, inserted] = index_.try_emplace(e, id);
    if (!inserted) {
      return std::nullopt;
    }
    nodes_.push_back({&it->first, parent, via, root ? 0 : nodes_[parent].depth + 1});
    return id;
  }

  const Node& operator[](std::uint32_t i) const { return nodes_[i]; }
  std::size_t size() const { return nodes_.size(); }

  RewritePath path_to(std::uint32_t i) const {
    RewritePath path;
    while (i != 0) {
      path.push_back(nodes_[i].via);
      i = nodes_[i].parent;
    }
    std::reverse(path.begin(), path.end());
    return path;
  }

 private:
  std::unordered_map<Expr, std::uint32_t> index_;
  std::vector<Node> nodes_;
};

struct QueueEntry {
  double priority;
  std::uint64_t seq;
  std::uint32_t node;
};

// Min-heap on priority, FIFO among equal priorities.
struct Later {
  bool operator()(const QueueEntry& a, const QueueEntry& b) const {
    if (a.priority != b.priority) {
      return a.priority > b.priority;
    }
    return a.seq > b.seq;
  }
};

using PriorityQueue = std::priority_queue<QueueEntry, std::vector<QueueEntry>, Later>;

SearchResult finish(SearchResult r, const Timer& timer, const SearchTree& tree) {
  r.stats.states_generated = tree.size();
  r.stats.elapsed_ms = timer.elapsed_ms();
  return r;
}

SearchResult found(SearchResult r, const SearchTree& tree, std::uint32_t node, const Timer& timer) {
  r.outcome = Outcome::Found;
  r.path = tree.path_to(node);
  return finish(std::move(r), timer, tree);
}

SearchResult stopped(SearchResult r, Outcome why, const SearchTree& tree, const Timer& timer) {
  r.outcome = why;
  return finish(std::move(r), timer, tree);
}

void note_expansion(SearchResult& r, const SearchConfig& cfg, const Expr& e) {
  ++r.stats.states_expanded;
  if (cfg.on_expand) {
    cfg.on_expand(e);
  }
}

}  // namespace

SearchResult bfs_search(const Expr& source, const Expr& target, const SearchConfig& cfg) {
  validate(cfg);
  const Timer timer(cfg.timeout);
  SearchTree tree(source);
  SearchResult r;
  if (source == target) {
    return found(std::move(r), tree, 0, timer);
  }
  std::deque<std::uint32_t> queue{0};
  while (!queue.empty()) {
    if (timer.expired()) {
      return stopped(std::move(r), Outcome::Timeout, tree, timer);
    }
    const std::uint32_t cur = queue.front();
    queue.pop_front();
    const Expr& e = *tree[cur].expr;
    note_expansion(r, cfg, e);
    for (auto& [t, next] : neighbors(e)) {
      const auto id = tree.add(next, cur, t);
      if (!id) {
        continue;
      }
      if (next == target) {
        return found(std::move(r), tree, *id, timer);
      }
      if (tree.size() >= cfg.max_visited) {
        return stopped(std::move(r), Outcome::ResourceLimit, tree, timer);
      }
      queue.push_back(*id);
    }
  }
  return stopped(std::move(r), Outcome::Exhausted, tree, timer);
}

SearchResult nngs_search(const Expr& source, const Expr& target, const Model& model,
                         const SearchConfig& cfg) {
  validate(cfg);
  const Timer timer(cfg.timeout);
  SearchTree tree(source);
  SearchResult r;
  if (source == target) {
    return found(std::move(r), tree, 0, timer);
  }
  const std::vector<double> target_embedding = model.embed(target);

  struct Ranking {
    std::array<std::uint8_t, kTransformationCount> order;
    std::uint8_t next = 0;
  };
  std::vector<Ranking> rankings;
  PriorityQueue queue;
  std::uint64_t seq = 0;

  auto insert = [&](std::uint32_t node) {
    const std::vector<double> emb = model.embed(*tree[node].expr);
    ++r.stats.nn_batches;
    const double estimate = model.distance(emb, target_embedding);
    const auto logits = model.logits(emb, target_embedding);
    Ranking rank;
    for (std::size_t i = 0; i < kTransformationCount; ++i) {
      rank.order[i] = static_cast<std::uint8_t>(i);
    }
    std::stable_sort(rank.order.begin(), rank.order.end(),
                     [&](std::uint8_t a, std::uint8_t b) { return logits[a] > logits[b]; });
    if (rankings.size() <= node) {
      rankings.resize(node + 1);
    }
    rankings[node] = rank;
    queue.push({priority(estimate, tree[node].depth, cfg.alpha), seq++, node});
  };

  insert(0);
  while (!queue.empty()) {
    if (timer.expired()) {
      return stopped(std::move(r), Outcome::Timeout, tree, timer);
    }
    const std::uint32_t cur = queue.top().node;
    Ranking& rank = rankings[cur];
    const Expr& e = *tree[cur].expr;
    if (rank.next == 0) {
      note_expansion(r, cfg, e);
    }
    const Transformation t = transformation_at(rank.order[rank.next++]);
    if (rank.next == kTransformationCount) {
      queue.pop();
    }
    std::optional<Expr> next = apply(e, t);
    if (!next) {
      continue;
    }
    const auto id = tree.add(*next, cur, t);
    if (!id) {
      continue;
    }
    if (*next == target) {
      return found(std::move(r), tree, *id, timer);
    }
    if (tree.size() >= cfg.max_visited) {
      return stopped(std::move(r), Outcome::ResourceLimit, tree, timer);
    }
    insert(*id);
  }
  return stopped(std::move(r), Outcome::Exhausted, tree, timer);
}

SearchResult batch_nngs_search(const Expr& source, const Expr& target, const Model& model,
                               const SearchConfig& cfg) {
  validate(cfg);
  const Timer timer(cfg.timeout);
  SearchTree tree(source);
  SearchResult r;
  if (source == target) {
    return found(std::move(r), tree, 0, timer);
  }
  const std::vector<double> target_embedding = model.embed(target);
  const std::size_t k = transfer_limit(cfg.batch_size);

  std::deque<std::uint32_t> main_queue{0};
  PriorityQueue reserve;
  std::uint64_t seq = 0;
  std::vector<Expr> batch;

  while (!(main_queue.empty() && reserve.empty())) {
    if (timer.expired()) {
      return stopped(std::move(r), Outcome::Timeout, tree, timer);
    }
    if (main_queue.size() > cfg.batch_size) {
      batch.clear();
      for (std::uint32_t id : main_queue) {
        batch.push_back(*tree[id].expr);
      }
      const auto embeddings = model.batch_embed(batch);
      ++r.stats.nn_batches;
      for (std::size_t i = 0; i < main_queue.size(); ++i) {
        const std::uint32_t id = main_queue[i];
        const double estimate = model.distance(embeddings[i], target_embedding);
        reserve.push({priority(estimate, tree[id].depth, cfg.alpha), seq++, id});
      }
      main_queue.clear();
    }
    if (main_queue.empty()) {
      const double first = reserve.top().priority;
      std::size_t moved = 0;
      do {
        main_queue.push_back(reserve.top().node);
        reserve.pop();
        ++moved;
      } while (moved < k && !reserve.empty() && reserve.top().priority < first + 1.0);
    }
    const std::uint32_t cur = main_queue.front();
    main_queue.pop_front();
    const Expr& e = *tree[cur].expr;
    note_expansion(r, cfg, e);
    for (auto& [t, next] : neighbors(e)) {
      const auto id = tree.add(next, cur, t);
      if (!id) {
        continue;
      }
      if (next == target) {
        return found(std::move(r), tree, *id, timer);
      }
      if (tree.size() >= cfg.max_visited) {
        return stopped(std::move(r), Outcome::ResourceLimit, tree, timer);
      }
      main_queue.push_back(*id);
    }
  }
  return stopped(std::move(r), Outcome::Exhausted, tree, timer);
}

SearchResult run_search(Algorithm algo, const Expr& source, const Expr& target, const Model* model,
                        const SearchConfig& cfg) {
  if (algo != Algorithm::Bfs && model == nullptr) {
    throw DomainError(std::string(name(algo)) + " requires a model");
  }
  switch (algo) {
    case Algorithm::Bfs:
      return bfs_search(source, target, cfg);
    case Algorithm::Nngs:
      return nngs_search(source, target, *model, cfg);
    case Algorithm::BatchNngs:
      return batch_nngs_search(source, target, *model, cfg);
  }
  throw DomainError("unknown algorithm");
}

void write_instances(std::ostream& out, const std::vector<Instance>& instances) {
  for (const Instance& inst : instances) {
    out << inst.id << '\t';
    if (inst.distance) {
      out << *inst.distance;
    } else {
      out << '-';
    }
    out << '\t' << print(inst.source) << '\t' << print(inst.target) << '\n';
  }
}

std::vector<Instance> read_instances(std::istream& in) {
  std::vector<Instance> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') {
      line.pop_back();
    }
    if (line.empty() || line.front() == '#') {
      continue;
    }
    std::vector<std::string> fields;
    std::size_t start = 0;
    for (;;) {
      const std::size_t tab = line.find('\t', start);
      fields.push_back(line.substr(start, tab - start));
      if (tab == std::string::npos) {
        break;
      }
      start = tab + 1;
    }
    const std::string where = "line " + std::to_string(line_no) + ": ";
    if (fields.size() != 4) {
      throw FormatError(where + "expected 4 tab-separated fields");
    }
    std::optional<int> distance;
    if (fields[1] != "-") {
      int d = 0;
      auto res = std::from_chars(fields[1].data(), fields[1].data() + fields[1].size(), d);
      if (res.ec != std::errc() || res.ptr != fields[1].data() + fields[1].size() || d < 0) {
        throw FormatError(where + "bad distance '" + fields[1] + "'");
      }
      distance = d;
    }
    try {
      out.push_back(Instance{fields[0], parse(fields[2]), parse(fields[3]), distance});
    } catch (const Error& err) {
      throw FormatError(where + err.what());
    }
  }
  return out;
}

std::vector<Instance> read_instances_file(const std::string& file) {
  std::ifstream in(file);
  if (!in) {
    throw FormatError("cannot open instance file " + file);
  }
  return read_instances(in);
}

std::string pair_key(const Expr& source, const Expr& target) {
  return source.prefix() + '|' + target.prefix();
}

std::vector<Instance> generate_instances(const InstanceConfig& cfg,
                                         const std::unordered_set<std::string>& exclude) {
  const bool walk_mode = cfg.walk_steps > 0;
  if (!walk_mode && (cfg.min_distance < 1 || cfg.max_distance < cfg.min_distance)) {
    throw DomainError("distance range must satisfy 1 <= min <= max");
  }
  std::vector<Instance> out;
  std::unordered_set<std::string> seen;
  for (std::size_t s = 0; out.size() < cfg.count; ++s) {
    if (s >= cfg.max_sources) {
      throw ResourceLimit("instance generation ran out of sources after " +
                          std::to_string(out.size()) + " instances");
    }
    Rng rng = Rng::derive(cfg.seed, s);
    const Expr base = gen_random_expr(cfg.height_lo, cfg.height_hi, rng);
    const Expr source =
        random_walk(base, static_cast<int>(rng.between(0, cfg.source_walk_max)), rng);
    std::optional<Expr> target;
    std::optional<int> distance;
    if (walk_mode) {
      target = random_walk(source, static_cast<int>(rng.between(1, cfg.walk_steps)), rng);
      if (*target == source) {
        continue;
      }
      try {
        distance = bfs_distance(source, *target, cfg.oracle_cap, cfg.ball_capacity);
      } catch (const ResourceLimit&) {
        distance.reset();
      }
    } else {
      const int span = cfg.max_distance - cfg.min_distance + 1;
      const int d = cfg.min_distance + static_cast<int>(out.size() % static_cast<std::size_t>(span));
      std::optional<DistanceBall> ball;
      try {
        ball.emplace(DistanceBall::explore(source, d, cfg.ball_capacity));
      } catch (const ResourceLimit&) {
        continue;
      }
      if (ball->max_depth() < d || ball->layer(d).empty()) {
        continue;
      }
      const auto& layer = ball->layer(d);
      target = *layer[rng.below(layer.size())];
      distance = d;
    }
    const std::string key = pair_key(source, *target);
    if (exclude.contains(key) || !seen.insert(key).second) {
      continue;
    }
    out.push_back(Instance{"i" + std::to_string(out.size()), source, *target, distance});
  }
  return out;
}

std::vector<BenchRow> bench(const std::vector<Instance>& instances,
                            const std::vector<Algorithm>& algos, const Model* model,
                            const SearchConfig& cfg, std::size_t jobs) {
  validate(cfg);
  for (Algorithm a : algos) {
    if (a != Algorithm::Bfs && model == nullptr) {
      throw DomainError(std::string(name(a)) + " requires a model");
    }
  }
  std::vector<BenchRow> rows(instances.size() * algos.size());
  auto run_one = [&](std::size_t task) {
    const Instance& inst = instances[task / algos.size()];
    const Algorithm algo = algos[task % algos.size()];
    BenchRow& row = rows[task];
    row.instance_id = inst.id;
    row.algorithm = algo;
    SearchConfig local = cfg;
    local.on_expand = nullptr;
    row.result = run_search(algo, inst.source, inst.target, model, local);
    row.certificate_valid =
        row.result.outcome == Outcome::Found &&
        check_certificate(inst.source, inst.target, row.result.path).valid;
  };
  jobs = std::max<std::size_t>(1, std::min(jobs, rows.size()));
  if (jobs == 1) {
    for (std::size_t i = 0; i < rows.size(); ++i) {
      run_one(i);
    }
    return rows;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  std::exception_ptr failure;
  std::mutex failure_mutex;
  for (std::size_t j = 0; j < jobs; ++j) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < rows.size(); i = next++) {
        try {
          run_one(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) {
            failure = std::current_exception();
          }
        }
      }
    });
  }
  for (std::thread& t : pool) {
    t.join();
  }
  if (failure) {
    std::rethrow_exception(failure);
  }
  return rows;
}

namespace {

void put_double(std::ostream& out, double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::fixed, 3);
  out.write(buf, res.ptr - buf);
}

}  // namespace

void write_bench_csv(std::ostream& out, const std::vector<BenchRow>& rows) {
  out << "instance_id,algorithm,outcome,path_len,states_expanded,states_generated,nn_batches,"
         "elapsed_ms\n";
  for (const BenchRow& row : rows) {
    const SearchResult& r = row.result;
    const bool found = r.outcome == Outcome::Found;
    out << row.instance_id << ',' << name(row.algorithm) << ','
        << (found && !row.certificate_valid ? "Invalid" : name(r.outcome)) << ',';
    if (found) {
      out << r.path.size();
    }
    out << ',' << r.stats.states_expanded << ',' << r.stats.states_generated << ','
        << r.stats.nn_batches << ',';
    put_double(out, r.stats.elapsed_ms);
    out << '\n';
  }
}

std::vector<CurvePoint> solve_curves(const std::vector<BenchRow>& rows,
                                     const std::vector<Algorithm>& algos) {
  std::vector<CurvePoint> out;
  for (Algorithm a : algos) {
    std::vector<double> times;
    for (const BenchRow& row : rows) {
      if (row.algorithm == a && row.certificate_valid) {
        times.push_back(row.result.stats.elapsed_ms);
      }
    }
    std::sort(times.begin(), times.end());
    out.push_back({a, 0.0, 0});
    for (std::size_t i = 0; i < times.size(); ++i) {
      out.push_back({a, times[i], i + 1});
    }
  }
  return out;
}

void write_curves_csv(std::ostream& out, const std::vector<CurvePoint>& points) {
  out << "algorithm,time_ms,solved\n";
  for (const CurvePoint& p : points) {
    out << name(p.algorithm) << ',';
    put_double(out, p.time_ms);
    out << ',' << p.solved << '\n';
  }
}

}  // namespace nngs
