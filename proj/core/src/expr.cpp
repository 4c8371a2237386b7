#include "nngs/expr.hpp"

#include <algorithm>
#include <cctype>

#include "nngs/errors.hpp"

namespace nngs {

char token(Symbol s) {
  static constexpr char kTokens[kSymbolCount] = {'+', '*', 'F', 'a', 'b', 'c'};
  return kTokens[code(s)];
}

Symbol symbol_from_token(char c) {
  switch (c) {
    case '+':
      return Symbol::Add;
    case '*':
      return Symbol::Mul;
    case 'F':
      return Symbol::Focus;
    case 'a':
      return Symbol::A;
    case 'b':
      return Symbol::B;
    case 'c':
      return Symbol::C;
    default:
      throw SyntaxError(std::string("unknown symbol '") + c + "'");
  }
}

std::array<double, kSymbolCount> one_hot(Symbol s) {
  std::array<double, kSymbolCount> v{};
  v[code(s)] = 1.0;
  return v;
}

namespace {

int token_arity(char c) {
  switch (c) {
    case '+':
    case '*':
      return 2;
    case 'F':
      return 1;
    default:
      return 0;
  }
}

}  // namespace

Expr Expr::from_prefix(std::string prefix) {
  // need: number of subtrees still expected.
  long need = 1;
  std::size_t focus_count = 0;
  for (std::size_t i = 0; i < prefix.size(); ++i) {
    if (need == 0) {
      throw SyntaxError("trailing symbols after a complete expression");
    }
    const char c = prefix[i];
    symbol_from_token(c);
    if (c == 'F') {
      ++focus_count;
      if (i + 1 < prefix.size() && prefix[i + 1] == 'F') {
        throw FocusCountError("focus directly under a focus");
      }
    }
    need += token_arity(c) - 1;
  }
  if (need != 0) {
    throw SyntaxError("incomplete expression");
  }
  if (focus_count != 1) {
    throw FocusCountError("expected exactly one focus marker, found " +
                          std::to_string(focus_count));
  }
  return Expr(std::move(prefix));
}

std::size_t Expr::subtree_end(std::size_t i) const {
  long need = 1;
  while (need > 0) {
    need += token_arity(prefix_[i]) - 1;
    ++i;
  }
  return i;
}

// Edges on the longest root-to-leaf path.
int Expr::height() const {
  // Remaining children of each open ancestor.
  std::vector<int> open;
  open.reserve(prefix_.size());
  int best = 0;
  for (char c : prefix_) {
    best = std::max(best, static_cast<int>(open.size()));
    const int k = token_arity(c);
    if (k > 0) {
      open.push_back(k);
      continue;
    }
    while (!open.empty() && --open.back() == 0) {
      open.pop_back();
    }
  }
  return best;
}

std::string Expr::defocused() const {
  std::string out = prefix_;
  out.erase(std::remove(out.begin(), out.end(), 'F'), out.end());
  return out;
}

namespace {

class Parser {
 public:
  explicit Parser(std::string_view text) : text_(text) {}

  std::string parse_all() {
    std::string out;
    parse_expr(out);
    skip_space();
    if (pos_ != text_.size()) {
      fail("unexpected trailing input");
    }
    return out;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const {
    throw SyntaxError(msg + " at offset " + std::to_string(pos_));
  }

  void skip_space() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) {
      ++pos_;
    }
  }

  void parse_expr(std::string& out) {
    skip_space();
    if (pos_ >= text_.size()) {
      fail("unexpected end of input");
    }
    const char c = text_[pos_];
    if (c == 'a' || c == 'b' || c == 'c') {
      ++pos_;
      expect_delimiter();
      out.push_back(c);
      return;
    }
    if (c != '(') {
      fail(std::string("unexpected token '") + c + "'");
    }
    ++pos_;
    skip_space();
    if (pos_ >= text_.size()) {
      fail("unexpected end of input");
    }
    const char op = text_[pos_];
    if (op != '+' && op != '*' && op != 'F') {
      fail(std::string("expected operator, got '") + op + "'");
    }
    ++pos_;
    expect_delimiter();
    out.push_back(op);
    for (int k = token_arity(op); k > 0; --k) {
      parse_expr(out);
    }
    skip_space();
    if (pos_ >= text_.size() || text_[pos_] != ')') {
      fail("expected ')'");
    }
    ++pos_;
  }

  // Tokens must be separated by whitespace or parentheses.
  void expect_delimiter() {
    if (pos_ < text_.size() && !std::isspace(static_cast<unsigned char>(text_[pos_])) &&
        text_[pos_] != '(' && text_[pos_] != ')') {
      fail("tokens must be whitespace-separated");
    }
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

void print_into(const std::string& prefix, std::size_t& i, std::string& out) {
  const char c = prefix[i++];
  const int k = token_arity(c);
  if (k == 0) {
    out.push_back(c);
    return;
  }
  out.push_back('(');
  out.push_back(c);
  for (int j = 0; j < k; ++j) {
    out.push_back(' ');
    print_into(prefix, i, out);
  }
  out.push_back(')');
}

}  // namespace

Expr parse(std::string_view text) { return Expr::from_prefix(Parser(text).parse_all()); }

std::string print(const Expr& e) {
  std::string out;
  out.reserve(e.length() * 4);
  std::size_t i = 0;
  print_into(e.prefix(), i, out);
  return out;
}

namespace {

std::uint64_t mulmod(std::uint64_t a, std::uint64_t b, std::uint64_t m) {
  return static_cast<std::uint64_t>(static_cast<unsigned __int128>(a) * b % m);
}

}  // namespace

std::uint64_t evaluate(const Expr& e, const Assignment& values, std::uint64_t modulus) {
  // Evaluate the prefix sequence right to left with an operand stack.
  std::vector<std::uint64_t> stack;
  stack.reserve(e.length());
  const std::string& p = e.prefix();
  for (std::size_t i = p.size(); i-- > 0;) {
    switch (p[i]) {
      case 'a':
      case 'b':
      case 'c':
        stack.push_back(values[static_cast<std::size_t>(p[i] - 'a')] % modulus);
        break;
      case 'F':
        break;
      case '+': {
        const std::uint64_t l = stack.back();
        stack.pop_back();
        const std::uint64_t r = stack.back();
        stack.back() = static_cast<std::uint64_t>(
            (static_cast<unsigned __int128>(l) + r) % modulus);
        break;
      }
      case '*': {
        const std::uint64_t l = stack.back();
        stack.pop_back();
        stack.back() = mulmod(l, stack.back(), modulus);
        break;
      }
    }
  }
  return stack.back();
}

PostOrderSeq encode_postorder(const Expr& e) {
  PostOrderSeq seq;
  seq.values.reserve(e.length());
  seq.arities.reserve(e.length());
  // Iterative post-order over the prefix sequence.
  struct Frame {
    std::size_t pos;
    int remaining;
  };
  std::vector<Frame> stack;
  const std::string& p = e.prefix();
  auto emit = [&](std::size_t pos) {
    const Symbol s = symbol_from_token(p[pos]);
    seq.values.push_back(s);
    seq.arities.push_back(static_cast<std::uint8_t>(arity(s)));
  };
  for (std::size_t i = 0; i < p.size(); ++i) {
    const int k = token_arity(p[i]);
    if (k > 0) {
      stack.push_back({i, k});
      continue;
    }
    emit(i);
    while (!stack.empty() && --stack.back().remaining == 0) {
      emit(stack.back().pos);
      stack.pop_back();
    }
  }
  return seq;
}

Expr decode_postorder(const PostOrderSeq& seq) {
  if (seq.values.size() != seq.arities.size()) {
    throw FormatError("post-order values and arities differ in length");
  }
  std::vector<std::string> stack;
  for (std::size_t i = 0; i < seq.values.size(); ++i) {
    const Symbol s = seq.values[i];
    const int k = seq.arities[i];
    if (k != arity(s)) {
      throw FormatError("arity does not match symbol at position " + std::to_string(i));
    }
    if (stack.size() < static_cast<std::size_t>(k)) {
      throw FormatError("operand stack underflow at position " + std::to_string(i));
    }
    std::string node(1, token(s));
    for (auto it = stack.end() - k; it != stack.end(); ++it) {
      node += *it;
    }
    stack.resize(stack.size() - static_cast<std::size_t>(k));
    stack.push_back(std::move(node));
  }
  if (stack.size() != 1) {
    throw FormatError("post-order sequence does not describe a single tree");
  }
  return Expr::from_prefix(std::move(stack.back()));
}

namespace {

// Appends a focus-free tree with exactly h nodes on its longest root-to-leaf path.
void gen_exact(int h, Rng& rng, std::string& out) {
  static constexpr char kVars[3] = {'a', 'b', 'c'};
  if (h == 1) {
    out.push_back(kVars[rng.below(3)]);
    return;
  }
  out.push_back(rng.below(2) == 0 ? '+' : '*');
  const int other = static_cast<int>(rng.between(1, h - 1));
  if (rng.below(2) == 0) {
    gen_exact(h - 1, rng, out);
    gen_exact(other, rng, out);
  } else {
    gen_exact(other, rng, out);
    gen_exact(h - 1, rng, out);
  }
}

}  // namespace

Expr gen_random_expr(int lo, int hi, Rng& rng) {
  if (lo < 2) {
    throw InfeasibleRange("height lower bound must be at least 2, got " + std::to_string(lo));
  }
  if (hi < lo) {
    throw InfeasibleRange("empty height range");
  }
  const int h = static_cast<int>(rng.between(lo, hi));
  std::string out = "F";
  gen_exact(h, rng, out);
  return Expr::unchecked(std::move(out));
}

Expr gen_random_expr(int lo, int hi, std::uint64_t seed) {
  Rng rng(seed);
  return gen_random_expr(lo, hi, rng);
}

}  // namespace nngs
