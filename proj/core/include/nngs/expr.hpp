#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "nngs/rng.hpp"

namespace nngs {

// Node symbols. The underlying value is the one-hot slot of the symbol.
enum class Symbol : std::uint8_t { Add = 0, Mul = 1, Focus = 2, A = 3, B = 4, C = 5 };

inline constexpr std::size_t kSymbolCount = 6;

constexpr std::size_t code(Symbol s) { return static_cast<std::size_t>(s); }

constexpr int arity(Symbol s) {
  switch (s) {
    case Symbol::Add:
    case Symbol::Mul:
      return 2;
    case Symbol::Focus:
      return 1;
    default:
      return 0;
  }
}

constexpr bool is_variable(Symbol s) { return s == Symbol::A || s == Symbol::B || s == Symbol::C; }
constexpr bool is_binary(Symbol s) { return s == Symbol::Add || s == Symbol::Mul; }

// Single-character token used in the prefix storage and the text grammar.
char token(Symbol s);
// Inverse of token(); throws SyntaxError for an unknown character.
Symbol symbol_from_token(char c);

std::array<double, kSymbolCount> one_hot(Symbol s);

// A well-formed expression: variables a, b, c, binary + and *, and exactly one
// focus marker F. Stored as its prefix (pre-order) symbol sequence, which is
// lossless because every symbol has a fixed arity. Structural equality is
// string equality, so expressions hash and compare cheaply in visited sets.
class Expr {
 public:
  // Validates the prefix sequence; throws SyntaxError or FocusCountError.
  static Expr from_prefix(std::string prefix);
  // No validation. Only for callers that preserve well-formedness by construction.
  static Expr unchecked(std::string prefix) { return Expr(std::move(prefix)); }

  const std::string& prefix() const noexcept { return prefix_; }
  Symbol at(std::size_t i) const { return symbol_from_token(prefix_[i]); }

  // Number of nodes, focus included.
  std::size_t length() const noexcept { return prefix_.size(); }
  // Nodes on the longest root-to-leaf path.
  int height() const;
  // Position of the focus marker in the prefix sequence.
  std::size_t focus_index() const noexcept { return prefix_.find('F'); }
  // One past the last position of the subtree rooted at position i.
  std::size_t subtree_end(std::size_t i) const;

  // The same expression with the focus marker erased. The result is not a
  // well-formed Expr, so it is returned as a raw prefix string.
  std::string defocused() const;

  friend bool operator==(const Expr&, const Expr&) = default;
  friend auto operator<=>(const Expr&, const Expr&) = default;

 private:
  explicit Expr(std::string prefix) : prefix_(std::move(prefix)) {}
  std::string prefix_;
};

// Parses `expr := 'a'|'b'|'c' | '(' ('+'|'*') expr expr ')' | '(' 'F' expr ')'`.
Expr parse(std::string_view text);
// Canonical single-spaced prefix s-expression; parse(print(e)) == e.
std::string print(const Expr& e);

inline std::size_t length(const Expr& e) { return e.length(); }
inline int height(const Expr& e) { return e.height(); }

// Residues assigned to a, b and c.
using Assignment = std::array<std::uint64_t, 3>;

// Value of e modulo `modulus` with the focus read as the identity.
std::uint64_t evaluate(const Expr& e, const Assignment& values, std::uint64_t modulus);

inline constexpr std::uint64_t kEvalPrime = 2305843009213693951ULL;  // 2^61 - 1

// Post-order (value, arity) encoding consumed by the batch executor.
struct PostOrderSeq {
  std::vector<Symbol> values;
  std::vector<std::uint8_t> arities;
};

PostOrderSeq encode_postorder(const Expr& e);
// Rebuilds the expression; throws FormatError when the stack discipline is
// violated and FocusCountError when the result is not well-formed.
Expr decode_postorder(const PostOrderSeq& seq);

// Random expression with height in [lo, hi] and the focus at the root.
Expr gen_random_expr(int lo, int hi, Rng& rng);
Expr gen_random_expr(int lo, int hi, std::uint64_t seed);

}  // namespace nngs

template <>
struct std::hash<nngs::Expr> {
  std::size_t operator()(const nngs::Expr& e) const noexcept {
    return std::hash<std::string>{}(e.prefix());
  }
};
