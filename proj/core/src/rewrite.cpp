#include "nngs/rewrite.hpp"

#include <bit>
#include <fstream>
#include <istream>
#include <ostream>

#include "nngs/errors.hpp"

namespace nngs {

namespace {

constexpr std::array<std::string_view, kTransformationCount> kNames = {
    "commute",  "assoc_right", "assoc_left", "distribute",
    "factor",   "focus_up",    "focus_left", "focus_right",
};

bool is_op(char c) { return c == '+' || c == '*'; }

// Position of the parent of node i, or npos when i is the root.
std::size_t parent_of(const std::string& p, std::size_t target) {
  struct Frame {
    std::size_t pos;
    int remaining;
  };
  std::vector<Frame> open;
  for (std::size_t i = 0; i < target; ++i) {
    const char c = p[i];
    const int k = c == 'F' ? 1 : (is_op(c) ? 2 : 0);
    if (k > 0) {
      open.push_back({i, k});
      continue;
    }
    while (!open.empty() && --open.back().remaining == 0) {
      open.pop_back();
    }
  }
  return open.empty() ? std::string::npos : open.back().pos;
}

using Span = std::pair<std::size_t, std::size_t>;  // [begin, end)

std::string_view view(const std::string& p, Span s) {
  return std::string_view(p).substr(s.first, s.second - s.first);
}

// Rebuilds prefix with [begin, end) replaced by the concatenation of parts.
template <class... Parts>
Expr splice(const std::string& p, std::size_t begin, std::size_t end, const Parts&... parts) {
  std::string out;
  out.reserve(p.size() + 8);
  out.append(p, 0, begin);
  (out.append(parts), ...);
  out.append(p, end, std::string::npos);
  return Expr::unchecked(std::move(out));
}

}  // namespace

std::string_view name(Transformation t) { return kNames[index(t)]; }

Transformation transformation_from_name(std::string_view n) {
  for (std::size_t i = 0; i < kNames.size(); ++i) {
    if (kNames[i] == n) {
      return transformation_at(i);
    }
  }
  throw FormatError("unknown transformation '" + std::string(n) + "'");
}

int TransformationSet::size() const { return std::popcount(bits_); }

std::vector<Transformation> TransformationSet::to_vector() const {
  std::vector<Transformation> out;
  for (Transformation t : kAllTransformations) {
    if (contains(t)) {
      out.push_back(t);
    }
  }
  return out;
}

std::optional<Expr> apply(const Expr& e, Transformation t) {
  const std::string& p = e.prefix();
  const std::size_t f = e.focus_index();

  if (t == Transformation::FocusUp) {
    const std::size_t parent = parent_of(p, f);
    if (parent == std::string::npos) {
      return std::nullopt;
    }
    // Move the marker from f to just before its parent.
    std::string out;
    out.reserve(p.size());
    out.append(p, 0, parent);
    out.push_back('F');
    out.append(p, parent, f - parent);
    out.append(p, f + 1, std::string::npos);
    return Expr::unchecked(std::move(out));
  }

  // Every other rule needs a binary node under the focus.
  const std::size_t op = f + 1;
  const char o = p[op];
  if (!is_op(o)) {
    return std::nullopt;
  }
  const Span left{op + 1, e.subtree_end(op + 1)};
  const Span right{left.second, e.subtree_end(left.second)};
  const std::string op_s(1, o);

  switch (t) {
    case Transformation::Commute:
      return splice(p, left.first, right.second, view(p, right), view(p, left));

    case Transformation::AssocToRight: {
      // F((e1 o e2) o e3) -> F(e1 o (e2 o e3))
      if (p[left.first] != o) {
        return std::nullopt;
      }
      const Span e1{left.first + 1, e.subtree_end(left.first + 1)};
      const Span e2{e1.second, left.second};
      return splice(p, left.first, right.second, view(p, e1), op_s, view(p, e2), view(p, right));
    }

    case Transformation::AssocToLeft: {
      // F(e1 o (e2 o e3)) -> F((e1 o e2) o e3)
      if (p[right.first] != o) {
        return std::nullopt;
      }
      const Span e2{right.first + 1, e.subtree_end(right.first + 1)};
      const Span e3{e2.second, right.second};
      return splice(p, left.first, right.second, op_s, view(p, left), view(p, e2), view(p, e3));
    }

    case Transformation::Distribute: {
      // F(e1 * (e2 + e3)) -> F((e1 * e2) + (e1 * e3))
      if (o != '*' || p[right.first] != '+') {
        return std::nullopt;
      }
      const Span e2{right.first + 1, e.subtree_end(right.first + 1)};
      const Span e3{e2.second, right.second};
      const auto e1 = view(p, left);
      return splice(p, op, right.second, "+*", e1, view(p, e2), "*", e1, view(p, e3));
    }

    case Transformation::Factor: {
      // F((e1 * e2) + (e1 * e3)) -> F(e1 * (e2 + e3))
      if (o != '+' || p[left.first] != '*' || p[right.first] != '*') {
        return std::nullopt;
      }
      const Span e1{left.first + 1, e.subtree_end(left.first + 1)};
      const Span e2{e1.second, left.second};
      const Span e1b{right.first + 1, e.subtree_end(right.first + 1)};
      const Span e3{e1b.second, right.second};
      if (view(p, e1) != view(p, e1b)) {
        return std::nullopt;
      }
      return splice(p, op, right.second, "*", view(p, e1), "+", view(p, e2), view(p, e3));
    }

    case Transformation::FocusLeft:
      // F(e1 o e2) -> F(e1) o e2
      return splice(p, f, op + 1, op_s, "F");

    case Transformation::FocusRight:
      // F(e1 o e2) -> e1 o F(e2)
      return splice(p, f, right.first, op_s, view(p, left), "F");

    case Transformation::FocusUp:
      break;
  }
  return std::nullopt;
}

std::vector<std::pair<Transformation, Expr>> neighbors(const Expr& e) {
  std::vector<std::pair<Transformation, Expr>> out;
  out.reserve(kTransformationCount);
  for (Transformation t : kAllTransformations) {
    if (auto next = apply(e, t)) {
      out.emplace_back(t, std::move(*next));
    }
  }
  return out;
}

Expr apply_path(const Expr& e, const RewritePath& path) {
  Expr current = e;
  for (std::size_t i = 0; i < path.size(); ++i) {
    auto next = apply(current, path[i]);
    if (!next) {
      throw StepFailed(i, "step " + std::to_string(i) + " (" + std::string(name(path[i])) +
                              ") does not apply to " + print(current));
    }
    current = std::move(*next);
  }
  return current;
}

Verdict check_certificate(const Expr& source, const Expr& target, const RewritePath& path) {
  try {
    const Expr end = apply_path(source, path);
    if (end != target) {
      return Verdict::invalid("mismatch: path ends at " + print(end));
    }
    return Verdict::ok();
  } catch (const StepFailed& err) {
    return Verdict::invalid("StepFailed(" + std::to_string(err.index()) + "): " + err.what());
  }
}

RewritePath read_path(std::istream& in) {
  RewritePath path;
  std::string line;
  while (std::getline(in, line)) {
    const auto b = line.find_first_not_of(" \t\r");
    if (b == std::string::npos) {
      continue;
    }
    const auto e = line.find_last_not_of(" \t\r");
    path.push_back(transformation_from_name(std::string_view(line).substr(b, e - b + 1)));
  }
  return path;
}

RewritePath read_path_file(const std::string& file) {
  std::ifstream in(file);
  if (!in) {
    throw FormatError("cannot open path file " + file);
  }
  return read_path(in);
}

void write_path(std::ostream& out, const RewritePath& path) {
  for (Transformation t : path) {
    out << name(t) << '\n';
  }
}

}  // namespace nngs
