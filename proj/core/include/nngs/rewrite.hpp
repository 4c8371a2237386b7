#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "nngs/expr.hpp"

namespace nngs {

// The eight rewrite kinds. The numeric value is the stable class label used by
// the transformation classifier.
enum class Transformation : std::uint8_t {
  Commute = 0,
  AssocToRight = 1,
  AssocToLeft = 2,
  Distribute = 3,
  Factor = 4,
  FocusUp = 5,
  FocusLeft = 6,
  FocusRight = 7,
};

inline constexpr std::size_t kTransformationCount = 8;

inline constexpr std::array<Transformation, kTransformationCount> kAllTransformations = {
    Transformation::Commute,    Transformation::AssocToRight, Transformation::AssocToLeft,
    Transformation::Distribute, Transformation::Factor,       Transformation::FocusUp,
    Transformation::FocusLeft,  Transformation::FocusRight,
};

constexpr std::size_t index(Transformation t) { return static_cast<std::size_t>(t); }
constexpr Transformation transformation_at(std::size_t i) {
  return static_cast<Transformation>(i);
}

// Names used in path files: commute, assoc_right, assoc_left, distribute,
// factor, focus_up, focus_left, focus_right.
std::string_view name(Transformation t);
// Throws FormatError for an unknown name.
Transformation transformation_from_name(std::string_view name);

// Small set of transformations, one bit per kind.
class TransformationSet {
 public:
  constexpr TransformationSet() = default;
  constexpr explicit TransformationSet(std::uint8_t bits) : bits_(bits) {}

  constexpr void insert(Transformation t) { bits_ |= static_cast<std::uint8_t>(1u << index(t)); }
  constexpr bool contains(Transformation t) const { return (bits_ >> index(t)) & 1u; }
  constexpr bool empty() const { return bits_ == 0; }
  constexpr std::uint8_t bits() const { return bits_; }
  int size() const;
  std::vector<Transformation> to_vector() const;

  constexpr TransformationSet& operator|=(TransformationSet o) {
    bits_ |= o.bits_;
    return *this;
  }
  friend constexpr bool operator==(TransformationSet, TransformationSet) = default;

 private:
  std::uint8_t bits_ = 0;
};

// Applies t at the focus. Returns nullopt when the pattern does not match.
std::optional<Expr> apply(const Expr& e, Transformation t);

// All applicable transformations with their results, in class-label order.
std::vector<std::pair<Transformation, Expr>> neighbors(const Expr& e);

using RewritePath = std::vector<Transformation>;

// Applies every step in order; throws StepFailed naming the first step that
// does not apply.
Expr apply_path(const Expr& e, const RewritePath& path);

struct Verdict {
  bool valid = false;
  std::string reason;  // empty when valid

  static Verdict ok() { return {true, {}}; }
  static Verdict invalid(std::string why) { return {false, std::move(why)}; }
  explicit operator bool() const { return valid; }
};

// Valid iff replaying the path from source succeeds and ends exactly at target.
Verdict check_certificate(const Expr& source, const Expr& target, const RewritePath& path);

// One transformation name per line. Blank lines are ignored.
RewritePath read_path(std::istream& in);
RewritePath read_path_file(const std::string& file);
void write_path(std::ostream& out, const RewritePath& path);

}  // namespace nngs
