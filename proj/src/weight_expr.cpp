#include "quadmesh/weight_expr.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <numbers>
#include <optional>
#include <system_error>
#include <utility>

#include "quadmesh/error.hpp"

namespace quadmesh {

namespace {

using Op = WeightExpr::Op;
using NodePtr = std::shared_ptr<const WeightExpr::Node>;

struct FunctionName {
  std::string_view name;
  Op op;
};

constexpr std::array<FunctionName, 7> kFunctions{{{"sin", Op::Sin},
                                                  {"cos", Op::Cos},
                                                  {"tan", Op::Tan},
                                                  {"exp", Op::Exp},
                                                  {"log", Op::Log},
                                                  {"sqrt", Op::Sqrt},
                                                  {"abs", Op::Abs}}};

struct Preset {
  std::string_view name;
  std::string_view source;
};

constexpr std::array<Preset, 3> kPresets{{{"uniform", "1.0"},
                                          {"paper_abs_sine", "5.0+200.0*abs(sin(2*pi*x)*sin(2*pi*y))"},
                                          {"paper_sine", "5.0+200.0*(sin(2*pi*x)*sin(2*pi*y))"}}};

NodePtr leaf(Op op, double value = 0.0) {
  auto n = std::make_shared<WeightExpr::Node>();
  n->op = op;
  n->value = value;
  return n;
}

NodePtr unary(Op op, NodePtr child) {
  auto n = std::make_shared<WeightExpr::Node>();
  n->op = op;
  n->lhs = std::move(child);
  return n;
}

NodePtr binary(Op op, NodePtr lhs, NodePtr rhs) {
  auto n = std::make_shared<WeightExpr::Node>();
  n->op = op;
  n->lhs = std::move(lhs);
  n->rhs = std::move(rhs);
  return n;
}

bool is_digit(char c) { return c >= '0' && c <= '9'; }
bool is_ident_start(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_'; }
bool is_ident_char(char c) { return is_ident_start(c) || is_digit(c); }

class Parser {
 public:
  explicit Parser(std::string_view src) : src_(src) {}

  NodePtr parse_all() {
    NodePtr e = expr();
    skip_space();
    if (pos_ < src_.size()) fail("unexpected '" + std::string(1, src_[pos_]) + "'");
    return e;
  }

 private:
  [[noreturn]] void fail(const std::string& message) const { throw ParseError(message, pos_); }

  void skip_space() {
    while (pos_ < src_.size() &&
           (src_[pos_] == ' ' || src_[pos_] == '\t' || src_[pos_] == '\n' || src_[pos_] == '\r'))
      ++pos_;
  }

  bool accept(char c) {
    skip_space();
    if (pos_ < src_.size() && src_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char c) {
    if (!accept(c)) {
      if (pos_ >= src_.size()) fail(std::string("expected '") + c + "' before end of input");
      fail(std::string("expected '") + c + "'");
    }
  }

  NodePtr expr() {
    NodePtr lhs = term();
    for (;;) {
      if (accept('+')) {
        lhs = binary(Op::Add, std::move(lhs), term());
      } else if (accept('-')) {
        lhs = binary(Op::Sub, std::move(lhs), term());
      } else {
        return lhs;
      }
    }
  }

  NodePtr term() {
    NodePtr lhs = factor();
    for (;;) {
      if (accept('*')) {
        lhs = binary(Op::Mul, std::move(lhs), factor());
      } else if (accept('/')) {
        lhs = binary(Op::Div, std::move(lhs), factor());
      } else {
        return lhs;
      }
    }
  }

  NodePtr factor() {
    NodePtr base = unary_expr();
    if (accept('^')) return binary(Op::Pow, std::move(base), factor());
    return base;
  }

  NodePtr unary_expr() {
    if (accept('-')) return unary(Op::Negate, atom());
    return atom();
  }

  NodePtr atom() {
    skip_space();
    if (pos_ >= src_.size()) fail("unexpected end of input");
    const char c = src_[pos_];
    if (c == '(') {
      ++pos_;
      NodePtr inner = expr();
      expect(')');
      return inner;
    }
    if (is_digit(c) || c == '.') return number();
    if (is_ident_start(c)) return identifier();
    fail("unexpected '" + std::string(1, c) + "'");
  }

  NodePtr number() {
    const std::size_t start = pos_;
    while (pos_ < src_.size() && is_digit(src_[pos_])) ++pos_;
    if (pos_ < src_.size() && src_[pos_] == '.') {
      ++pos_;
      while (pos_ < src_.size() && is_digit(src_[pos_])) ++pos_;
    }
    if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
      std::size_t p = pos_ + 1;
      if (p < src_.size() && (src_[p] == '+' || src_[p] == '-')) ++p;
      if (p < src_.size() && is_digit(src_[p])) {
        pos_ = p;
        while (pos_ < src_.size() && is_digit(src_[pos_])) ++pos_;
      }
    }
    double value = 0.0;
    const char* first = src_.data() + start;
    const char* last = src_.data() + pos_;
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc{} || ptr != last || !std::isfinite(value)) {
      pos_ = start;
      fail("malformed number '" + std::string(first, last) + "'");
    }
    return leaf(Op::Constant, value);
  }

  NodePtr identifier() {
    const std::size_t start = pos_;
    while (pos_ < src_.size() && is_ident_char(src_[pos_])) ++pos_;
    const std::string_view id = src_.substr(start, pos_ - start);
    if (id == "x") return leaf(Op::X);
    if (id == "y") return leaf(Op::Y);
    if (id == "pi") return leaf(Op::Pi);
    for (const auto& f : kFunctions) {
      if (id == f.name) {
        expect('(');
        NodePtr arg = expr();
        expect(')');
        return unary(f.op, std::move(arg));
      }
    }
    pos_ = start;
    fail("unknown identifier '" + std::string(id) + "'");
  }

  std::string_view src_;
  std::size_t pos_ = 0;
};

std::string format_number(double v) {
  std::array<char, 32> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), ptr);
}

std::string_view function_name(Op op) {
  for (const auto& f : kFunctions) {
    if (f.op == op) return f.name;
  }
  return "?";
}

char operator_symbol(Op op) {
  switch (op) {
    case Op::Add: return '+';
    case Op::Sub: return '-';
    case Op::Mul: return '*';
    case Op::Div: return '/';
    case Op::Pow: return '^';
    default: return '?';
  }
}

void print(const WeightExpr::Node& n, std::string& out) {
  switch (n.op) {
    case Op::Constant: out += format_number(n.value); return;
    case Op::Pi: out += "pi"; return;
    case Op::X: out += 'x'; return;
    case Op::Y: out += 'y'; return;
    case Op::Negate:
      out += "(-";
      print(*n.lhs, out);
      out += ')';
      return;
    case Op::Add:
    case Op::Sub:
    case Op::Mul:
    case Op::Div:
    case Op::Pow:
      out += '(';
      print(*n.lhs, out);
      out += operator_symbol(n.op);
      print(*n.rhs, out);
      out += ')';
      return;
    default:
      out += function_name(n.op);
      out += '(';
      print(*n.lhs, out);
      out += ')';
      return;
  }
}

std::string text_of(const WeightExpr::Node& n) {
  std::string s;
  print(n, s);
  return s;
}

double checked(double v, const WeightExpr::Node& n) {
  if (!std::isfinite(v)) throw EvalError("non-finite result", text_of(n));
  return v;
}

double evaluate(const WeightExpr::Node& n, double x, double y);

// sin(pi m) and cos(pi m) with the reduction done on m, so that integer and
// half-integer m give exact zeros and ones.
double sin_pi(double m) {
  double r = std::fmod(m, 2.0);
  if (r < 0) r += 2.0;
  double sign = 1.0;
  if (r >= 1.0) {
    r -= 1.0;
    sign = -1.0;
  }
  if (r > 0.5) r = 1.0 - r;
  if (r == 0.0) return 0.0;
  if (r == 0.5) return sign;
  return sign * std::sin(std::numbers::pi * r);
}

double cos_pi(double m) { return sin_pi(std::abs(m) + 0.5); }

// If n is pi times something built only from * and /, the multiplier.
std::optional<double> pi_multiple(const WeightExpr::Node& n, double x, double y) {
  switch (n.op) {
    case Op::Pi: return 1.0;
    case Op::Negate:
      if (auto m = pi_multiple(*n.lhs, x, y)) return -*m;
      return std::nullopt;
    case Op::Mul:
      if (auto m = pi_multiple(*n.lhs, x, y)) return checked(*m * evaluate(*n.rhs, x, y), n);
      if (auto m = pi_multiple(*n.rhs, x, y)) return checked(evaluate(*n.lhs, x, y) * *m, n);
      return std::nullopt;
    case Op::Div:
      if (auto m = pi_multiple(*n.lhs, x, y)) {
        const double den = evaluate(*n.rhs, x, y);
        if (den == 0.0) throw EvalError("division by zero", text_of(n));
        return checked(*m / den, n);
      }
      return std::nullopt;
    default: return std::nullopt;
  }
}

double evaluate(const WeightExpr::Node& n, double x, double y) {
  switch (n.op) {
    case Op::Constant: return n.value;
    case Op::Pi: return std::numbers::pi;
    case Op::X: return x;
    case Op::Y: return y;
    case Op::Negate: return -evaluate(*n.lhs, x, y);
    case Op::Add: return checked(evaluate(*n.lhs, x, y) + evaluate(*n.rhs, x, y), n);
    case Op::Sub: return checked(evaluate(*n.lhs, x, y) - evaluate(*n.rhs, x, y), n);
    case Op::Mul: return checked(evaluate(*n.lhs, x, y) * evaluate(*n.rhs, x, y), n);
    case Op::Div: {
      const double num = evaluate(*n.lhs, x, y);
      const double den = evaluate(*n.rhs, x, y);
      if (den == 0.0) throw EvalError("division by zero", text_of(n));
      return checked(num / den, n);
    }
    case Op::Pow: return checked(std::pow(evaluate(*n.lhs, x, y), evaluate(*n.rhs, x, y)), n);
    case Op::Sin:
      if (auto m = pi_multiple(*n.lhs, x, y)) return sin_pi(*m);
      return checked(std::sin(evaluate(*n.lhs, x, y)), n);
    case Op::Cos:
      if (auto m = pi_multiple(*n.lhs, x, y)) return cos_pi(*m);
      return checked(std::cos(evaluate(*n.lhs, x, y)), n);
    case Op::Tan: {
      if (auto m = pi_multiple(*n.lhs, x, y)) {
        const double c = cos_pi(*m);
        if (c == 0.0) throw EvalError("tan at an odd multiple of pi/2", text_of(n));
        return checked(sin_pi(*m) / c, n);
      }
      return checked(std::tan(evaluate(*n.lhs, x, y)), n);
    }
    case Op::Exp: return checked(std::exp(evaluate(*n.lhs, x, y)), n);
    case Op::Log: {
      const double a = evaluate(*n.lhs, x, y);
      if (!(a > 0.0)) throw EvalError("log of non-positive value", text_of(n));
      return std::log(a);
    }
    case Op::Sqrt: {
      const double a = evaluate(*n.lhs, x, y);
      if (a < 0.0) throw EvalError("sqrt of negative value", text_of(n));
      return std::sqrt(a);
    }
    case Op::Abs: return std::abs(evaluate(*n.lhs, x, y));
  }
  return 0.0;
}

bool same_tree(const WeightExpr::Node* a, const WeightExpr::Node* b) {
  if (a == b) return true;
  if (a == nullptr || b == nullptr) return false;
  if (a->op != b->op) return false;
  if (a->op == Op::Constant && a->value != b->value) return false;
  return same_tree(a->lhs.get(), b->lhs.get()) && same_tree(a->rhs.get(), b->rhs.get());
}

}  // namespace

WeightExpr WeightExpr::parse(std::string_view source) { return WeightExpr(Parser(source).parse_all()); }

double WeightExpr::eval(double x, double y) const { return evaluate(*root_, x, y); }

std::string WeightExpr::to_string() const { return text_of(*root_); }

bool operator==(const WeightExpr& a, const WeightExpr& b) {
  return same_tree(a.root_.get(), b.root_.get());
}

std::string_view weight_preset_source(std::string_view name) {
  for (const auto& p : kPresets) {
    if (p.name == name) return p.source;
  }
  std::string known;
  for (const auto& p : kPresets) known += (known.empty() ? "" : ", ") + std::string(p.name);
  throw Error("unknown weight preset '" + std::string(name) + "' (available: " + known + ")");
}

WeightExpr weight_preset(std::string_view name) {
  return WeightExpr::parse(weight_preset_source(name));
}

}  // namespace quadmesh
