#pragma once

// A small expression language for order fields, Lagrangians, constraints and
// costs supplied as text.
//
//   expr    := term (('+' | '-') term)*
//   term    := unary (('*' | '/') unary)*
//   unary   := '-' unary | power
//   power   := primary ('^' unary)?
//   primary := number | name | name '(' expr (',' expr)* ')' | '(' expr ')'
//
// '^' is right-associative and binds tighter than unary minus, so "-a^b" is
// -(a^b) and "2^-1" is 0.5. Functions: sin cos exp ln sqrt abs gamma.

#include <cstddef>
#include <map>
#include <memory>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "vofc/error.hpp"

namespace vofc::expr {

/// Parse failure with the 0-based byte offset at which it was detected.
class ParseError : public Error {
 public:
  ParseError(ErrorKind kind, std::size_t position, const std::string& detail)
      : Error(kind, detail + " at position " + std::to_string(position + 1)), position_(position) {}

  std::size_t position() const noexcept { return position_; }

 private:
  std::size_t position_;
};

using EvalContext = std::map<std::string, double, std::less<>>;

struct Node;

/// Immutable, shareable syntax tree. Variables are bound to slots in the
/// order of the variable list given to parse().
class Expr {
 public:
  Expr(std::shared_ptr<const Node> root, std::vector<std::string> slots);

  /// Evaluates with one value per slot (same order as slots()).
  double evaluate(std::span<const double> values) const;
  double evaluate(const EvalContext& ctx) const;

  const std::vector<std::string>& slots() const noexcept { return slots_; }
  /// Variables that actually occur in the tree.
  std::set<std::string> free_variables() const;
  /// Fully parenthesized rendering; re-parsing it yields the same operations.
  std::string to_string() const;
  bool is_constant() const;

 private:
  std::shared_ptr<const Node> root_;
  std::vector<std::string> slots_;
};

Expr parse(std::string_view source, std::vector<std::string> allowed_vars);

double evaluate(const Expr& e, const EvalContext& ctx);

/// Central difference (e(v + step) - e(v - step)) / (2 step) in variable `var`.
double differentiate_numeric(const Expr& e, const std::string& var, const EvalContext& ctx, double step);

}  // namespace vofc::expr
