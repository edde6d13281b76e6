#pragma once

#include <memory>
#include <string>
#include <string_view>

#include "quadmesh/vec2.hpp"

namespace quadmesh {

// Analytic adaptive weight s(x, y), parsed from a small expression language:
//
//   expr   := term (('+' | '-') term)*
//   term   := factor (('*' | '/') factor)*
//   factor := unary ('^' factor)?          right associative
//   unary  := '-'? atom                    -a^b parses as (-a)^b
//   atom   := number | 'x' | 'y' | 'pi' | func '(' expr ')' | '(' expr ')'
//   func   := sin | cos | tan | exp | log | sqrt | abs
//
// Whitespace is insignificant. Immutable after parsing; copies share the tree.
// Trigonometric arguments that are products or quotients involving pi are
// reduced in units of pi, so sin(2*pi*x) is exactly 0 at x = 0.5.
class WeightExpr {
 public:
  enum class Op {
    Constant, Pi, X, Y,
    Negate,
    Add, Sub, Mul, Div, Pow,
    Sin, Cos, Tan, Exp, Log, Sqrt, Abs,
  };

  struct Node {
    Op op = Op::Constant;
    double value = 0.0;  // Constant only
    std::shared_ptr<const Node> lhs;  // sole child of Negate and functions
    std::shared_ptr<const Node> rhs;
  };

  // Throws ParseError with the byte offset of the offending token.
  static WeightExpr parse(std::string_view source);

  // Throws EvalError on log/sqrt outside their domain, division by zero or
  // any other non-finite intermediate. Never returns NaN or Inf.
  double eval(double x, double y) const;
  double operator()(const Point2& p) const { return eval(p.x, p.y); }

  // Fully parenthesised form that parses back to a structurally equal tree.
  std::string to_string() const;

  const Node& root() const noexcept { return *root_; }

  // Structural equality of the trees.
  friend bool operator==(const WeightExpr& a, const WeightExpr& b);

 private:
  explicit WeightExpr(std::shared_ptr<const Node> root) : root_(std::move(root)) {}
  std::shared_ptr<const Node> root_;
};

// uniform, paper_abs_sine, paper_sine. Throws Error for anything else.
WeightExpr weight_preset(std::string_view name);

// Source text of a preset.
std::string_view weight_preset_source(std::string_view name);

}  // namespace quadmesh
