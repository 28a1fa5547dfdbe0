#pragma once

#include <memory>
#include <span>
#include <string>

#include "formlab/common.hpp"

namespace formlab {

/// Syntax error in DSL text; position is the 0-based character offset.
class ParseError : public InvalidInput {
 public:
  ParseError(const std::string& message, std::size_t position);
  std::size_t position() const { return position_; }

 private:
  std::size_t position_;
};

/// Immutable expression tree for functions C^d -> C.
///
/// Grammar (whitespace-insensitive):
///   expr    := term (('+' | '-') term)*
///   term    := unary (('*' | '/') unary)*
///   unary   := '-' unary | primary
///   primary := number ['i'] | 'i' | 'x' index | '(' expr ')'
///            | ('conj' | 'abs' | 're' | 'im') '(' expr ')'
///            | ('abspow' | 'abspow0') '(' expr ',' const ')'
///            | 'phase' '(' const ')'
/// `const` is a variable-free real expression folded at parse time.
/// abspow(e, s) = |e|^s, an error at e = 0 when s <= 0; abspow0 is the same
/// power with value 0 at e = 0 for every s. phase(t) = exp(i t).
/// Sums and negations of bare literals fold into one complex literal, so
/// "2+3i" is a single constant.
class Expr {
 public:
  enum class Kind { literal, variable, neg, conj, abs, re, im, add, sub, mul, div, abspow, abspow0, phase };

  static Expr literal(cplx v);
  static Expr variable(std::size_t index);  // 1-based
  static Expr unary(Kind k, Expr a);
  static Expr binary(Kind k, Expr a, Expr b);
  static Expr power(Expr base, double exponent, bool zero_at_origin);
  static Expr phase(double theta);

  Kind kind() const;
  /// Largest variable index used (0 if none).
  std::size_t arity() const;
  /// Canonical fully parenthesized text; parse_expr(to_string()) rebuilds an
  /// equal tree for any tree produced by the parser.
  std::string to_string() const;

  friend bool operator==(const Expr& a, const Expr& b);

  struct Node;
  const Node& node() const { return *node_; }

 private:
  explicit Expr(std::shared_ptr<const Node> n) : node_(std::move(n)) {}
  std::shared_ptr<const Node> node_;
};

/// Parses DSL text over variables x1..xd. Throws ParseError on bad syntax or
/// a variable index outside 1..d.
Expr parse_expr(const std::string& text, std::size_t d);

/// Throws EvalError on a zero denominator or abspow(0, s <= 0), and
/// InvalidInput if x has fewer than arity() coordinates.
cplx eval_expr(const Expr& e, std::span<const cplx> x);

}  // namespace formlab
