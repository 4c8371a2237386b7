#include "nngs/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>
#include <unordered_set>

#include "nngs/errors.hpp"

namespace nngs {

std::optional<int> bfs_distance(const Expr& source, const Expr& target, int max_depth,
                                std::size_t capacity) {
  if (source == target) {
    return 0;
  }
  std::unordered_set<Expr> seen{source};
  std::vector<Expr> frontier{source};
  std::vector<Expr> next;
  for (int d = 1; d <= max_depth && !frontier.empty(); ++d) {
    next.clear();
    for (const Expr& x : frontier) {
      for (auto& [t, y] : neighbors(x)) {
        if (y == target) {
          return d;
        }
        if (seen.insert(y).second) {
          if (seen.size() > capacity) {
            throw ResourceLimit("visited set exceeded " + std::to_string(capacity) + " expressions");
          }
          next.push_back(std::move(y));
        }
      }
    }
    frontier.swap(next);
  }
  return std::nullopt;
}

DistanceBall DistanceBall::explore(const Expr& source, int max_depth, std::size_t capacity) {
  DistanceBall ball;
  ball.entries_.reserve(1024);
  auto root = ball.entries_.emplace(source, Entry{0, {}}).first;
  ball.layers_.push_back({&root->first});
  for (int d = 0; d < max_depth; ++d) {
    std::vector<const Expr*> next;
    for (const Expr* x : ball.layers_.back()) {
      const TransformationSet inherited = ball.entries_.find(*x)->second.firsts;
      for (auto& [t, y] : neighbors(*x)) {
        TransformationSet firsts = inherited;
        if (d == 0) {
          firsts = {};
          firsts.insert(t);
        }
        auto [it, fresh] = ball.entries_.try_emplace(std::move(y), Entry{d + 1, firsts});
        if (fresh) {
          if (ball.entries_.size() > capacity) {
            throw ResourceLimit("distance ball exceeded " + std::to_string(capacity) +
                                " expressions");
          }
          next.push_back(&it->first);
        } else if (it->second.distance == d + 1) {
          it->second.firsts |= firsts;
        }
      }
    }
    if (next.empty()) {
      break;
    }
    ball.layers_.push_back(std::move(next));
  }
  return ball;
}

const DistanceBall::Entry* DistanceBall::find(const Expr& e) const {
  auto it = entries_.find(e);
  return it == entries_.end() ? nullptr : &it->second;
}

TransformationSet shortest_first_transformations(const Expr& source, const Expr& target,
                                                 int max_depth, std::size_t capacity) {
  if (source == target) {
    throw DomainError("source equals target: no first transformation at distance 0");
  }
  // Layered search that tracks first steps, stopping once the target's layer
  // has been fully generated so every shortest-path parent has contributed.
  std::unordered_map<Expr, DistanceBall::Entry> seen;
  seen.emplace(source, DistanceBall::Entry{0, {}});
  std::vector<const Expr*> frontier{&seen.begin()->first};
  for (int d = 0; d < max_depth && !frontier.empty(); ++d) {
    std::vector<const Expr*> next;
    for (const Expr* x : frontier) {
      const TransformationSet inherited = seen.find(*x)->second.firsts;
      for (auto& [t, y] : neighbors(*x)) {
        TransformationSet firsts = inherited;
        if (d == 0) {
          firsts = {};
          firsts.insert(t);
        }
        auto [it, fresh] = seen.try_emplace(std::move(y), DistanceBall::Entry{d + 1, firsts});
        if (fresh) {
          if (seen.size() > capacity) {
            throw ResourceLimit("visited set exceeded " + std::to_string(capacity) + " expressions");
          }
          next.push_back(&it->first);
        } else if (it->second.distance == d + 1) {
          it->second.firsts |= firsts;
        }
      }
    }
    auto hit = seen.find(target);
    if (hit != seen.end()) {
      return hit->second.firsts;
    }
    frontier.swap(next);
  }
  throw Unreachable("target farther than " + std::to_string(max_depth) + " steps");
}

std::string_view name(Split s) {
  switch (s) {
    case Split::Train:
      return "train";
    case Split::Validation:
      return "validation";
    case Split::Test:
      return "test";
  }
  return "unknown";
}

namespace {

std::size_t cell_index(int distance, int min_distance, Transformation t) {
  return static_cast<std::size_t>(distance - min_distance) * kTransformationCount + index(t);
}

}  // namespace

Expr random_walk(Expr e, int steps, Rng& rng) {
  for (int i = 0; i < steps; ++i) {
    auto nb = neighbors(e);
    if (nb.empty()) {
      break;
    }
    e = std::move(nb[rng.below(nb.size())].second);
  }
  return e;
}

GenerationResult generate_dataset(const GenerationConfig& cfg) {
  if (cfg.min_distance < 1 || cfg.max_distance < cfg.min_distance) {
    throw DomainError("distance range must satisfy 1 <= min <= max");
  }
  if (cfg.per_cell < 1) {
    throw DomainError("per_cell must be at least 1");
  }
  const std::size_t n_dist = static_cast<std::size_t>(cfg.max_distance - cfg.min_distance + 1);
  std::vector<std::vector<Example>> cells(n_dist * kTransformationCount);
  std::size_t open_cells = cells.size();

  GenerationResult result;
  std::unordered_set<std::string> used_pairs;
  std::size_t s = 0;
  for (; s < cfg.max_sources && open_cells > 0; ++s) {
    Rng rng = Rng::derive(cfg.seed, s);
    const Expr base = gen_random_expr(cfg.height_lo, cfg.height_hi, rng);
    const Expr source =
        random_walk(base, static_cast<int>(rng.between(0, cfg.walk_max)), rng);

    std::optional<DistanceBall> ball;
    try {
      ball.emplace(DistanceBall::explore(source, cfg.max_distance, cfg.ball_capacity));
    } catch (const ResourceLimit&) {
      continue;
    }

    for (int d = cfg.min_distance; d <= std::min(cfg.max_distance, ball->max_depth()); ++d) {
      const auto& layer = ball->layer(d);
      std::vector<std::size_t> order(layer.size());
      for (std::size_t i = 0; i < order.size(); ++i) {
        order[i] = i;
      }
      // Partial Fisher-Yates: only the inspected prefix needs shuffling.
      const std::size_t inspect = std::min(cfg.candidates_per_layer, order.size());
      std::size_t accepted = 0;
      for (std::size_t i = 0; i < inspect && accepted < cfg.per_source_layer; ++i) {
        std::swap(order[i], order[i + rng.below(order.size() - i)]);
        const Expr& target = *layer[order[i]];
        const auto firsts = ball->find(target)->firsts.to_vector();
        const Transformation first = firsts[rng.below(firsts.size())];
        auto& cell = cells[cell_index(d, cfg.min_distance, first)];
        if (cell.size() >= cfg.per_cell) {
          continue;
        }
        if (!used_pairs.insert(source.prefix() + '|' + target.prefix()).second) {
          continue;
        }
        cell.push_back(Example{source, target, d, first});
        ++accepted;
        if (cell.size() == cfg.per_cell) {
          --open_cells;
        }
      }
    }
  }
  result.sources_used = s;

  for (std::size_t c = 0; c < cells.size(); ++c) {
    const int d = cfg.min_distance + static_cast<int>(c / kTransformationCount);
    const Transformation t = transformation_at(c % kTransformationCount);
    if (cells[c].size() < cfg.per_cell) {
      result.shortfalls.push_back({d, t, cells[c].size(), cfg.per_cell});
    }
    for (auto& ex : cells[c]) {
      result.examples.push_back(std::move(ex));
    }
  }
  return result;
}

std::array<Dataset, 3> split_dataset(const std::vector<Example>& examples, const SplitRatios& ratios,
                                     std::uint64_t seed) {
  const double total = ratios.train + ratios.validation + ratios.test;
  if (!(ratios.train >= 0 && ratios.validation >= 0 && ratios.test >= 0 && total > 0)) {
    throw DomainError("split ratios must be non-negative with a positive sum");
  }
  // Group by cell, keeping first-seen cell order.
  std::vector<std::pair<std::size_t, std::vector<const Example*>>> groups;
  std::unordered_map<std::size_t, std::size_t> where;
  for (const Example& ex : examples) {
    const std::size_t key = static_cast<std::size_t>(ex.distance) * kTransformationCount + index(ex.first);
    auto [it, fresh] = where.try_emplace(key, groups.size());
    if (fresh) {
      groups.push_back({key, {}});
    }
    groups[it->second].second.push_back(&ex);
  }
  std::sort(groups.begin(), groups.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });

  std::array<Dataset, 3> out;
  out[0].split = Split::Train;
  out[1].split = Split::Validation;
  out[2].split = Split::Test;
  Rng rng(seed);
  for (auto& [key, members] : groups) {
    rng.shuffle(members.begin(), members.end());
    const auto n = static_cast<double>(members.size());
    const auto n_test = static_cast<std::size_t>(std::floor(n * ratios.test / total));
    const auto n_val = static_cast<std::size_t>(std::floor(n * ratios.validation / total));
    std::size_t i = 0;
    for (; i < n_test; ++i) {
      out[2].examples.push_back(*members[i]);
    }
    for (; i < n_test + n_val; ++i) {
      out[1].examples.push_back(*members[i]);
    }
    for (; i < members.size(); ++i) {
      out[0].examples.push_back(*members[i]);
    }
  }
  return out;
}

DatasetStats dataset_stats(const Dataset& d) {
  DatasetStats st;
  st.count = d.examples.size();
  if (d.examples.empty()) {
    return st;
  }
  double len_sum = 0;
  double h_sum = 0;
  std::size_t lmin = SIZE_MAX, lmax = 0;
  int hmin = INT32_MAX, hmax = 0;
  for (const Example& ex : d.examples) {
    for (const Expr* e : {&ex.source, &ex.target}) {
      const std::size_t l = e->length();
      const int h = e->height();
      len_sum += static_cast<double>(l);
      h_sum += h;
      lmin = std::min(lmin, l);
      lmax = std::max(lmax, l);
      hmin = std::min(hmin, h);
      hmax = std::max(hmax, h);
    }
  }
  const double n = 2.0 * static_cast<double>(d.examples.size());
  st.avg_length = len_sum / n;
  st.min_length = lmin;
  st.max_length = lmax;
  st.avg_height = h_sum / n;
  st.min_height = hmin;
  st.max_height = hmax;
  return st;
}

void write_stats_csv(std::ostream& out,
                     const std::vector<std::pair<std::string, DatasetStats>>& cols) {
  auto row = [&](const char* label, auto&& cell) {
    out << label;
    for (const auto& [_, st] : cols) {
      out << ',' << cell(st);
    }
    out << '\n';
  };
  auto opt = [](const auto& v) -> std::string {
    if (!v) {
      return "";
    }
    std::ostringstream s;
    if constexpr (std::is_floating_point_v<std::decay_t<decltype(*v)>>) {
      s << std::fixed << std::setprecision(2);
    }
    s << *v;
    return s.str();
  };
  out << "statistic";
  for (const auto& [label, _] : cols) {
    out << ',' << label;
  }
  out << '\n';
  row("Number of examples", [](const DatasetStats& s) { return std::to_string(s.count); });
  row("Average length", [&](const DatasetStats& s) { return opt(s.avg_length); });
  row("Minimum length", [&](const DatasetStats& s) { return opt(s.min_length); });
  row("Maximum length", [&](const DatasetStats& s) { return opt(s.max_length); });
  row("Average height", [&](const DatasetStats& s) { return opt(s.avg_height); });
  row("Minimum height", [&](const DatasetStats& s) { return opt(s.min_height); });
  row("Maximum height", [&](const DatasetStats& s) { return opt(s.max_height); });
}

void write_examples(std::ostream& out, const std::vector<Example>& examples) {
  for (const Example& ex : examples) {
    out << ex.distance << '\t' << name(ex.first) << '\t' << print(ex.source) << '\t'
        << print(ex.target) << '\n';
  }
}

std::vector<Example> read_examples(std::istream& in) {
  std::vector<Example> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') {
      line.pop_back();
    }
    if (line.empty()) {
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
    if (fields.size() != 4) {
      throw FormatError("line " + std::to_string(line_no) + ": expected 4 tab-separated fields");
    }
    int distance = 0;
    try {
      std::size_t used = 0;
      distance = std::stoi(fields[0], &used);
      if (used != fields[0].size()) {
        throw std::invalid_argument("trailing");
      }
    } catch (const std::exception&) {
      throw FormatError("line " + std::to_string(line_no) + ": bad distance '" + fields[0] + "'");
    }
    try {
      out.push_back(Example{parse(fields[2]), parse(fields[3]), distance,
                            transformation_from_name(fields[1])});
    } catch (const Error& err) {
      throw FormatError("line " + std::to_string(line_no) + ": " + err.what());
    }
  }
  return out;
}

std::vector<Example> read_examples_file(const std::string& file) {
  std::ifstream in(file);
  if (!in) {
    throw FormatError("cannot open dataset file " + file);
  }
  return read_examples(in);
}

}  // namespace nngs
