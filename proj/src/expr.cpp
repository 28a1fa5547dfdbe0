#include "formlab/expr.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>

namespace formlab {

struct Expr::Node {
  Kind kind = Kind::literal;
  cplx value{};           // literal
  std::size_t index = 0;  // variable, 1-based
  double real = 0.0;      // abspow exponent or phase angle
  std::shared_ptr<const Node> a, b;
  std::size_t arity = 0;
};

ParseError::ParseError(const std::string& message, std::size_t position)
    : InvalidInput(message + " at position " + std::to_string(position)), position_(position) {}

Expr Expr::literal(cplx v) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::literal;
  n->value = v;
  return Expr(std::move(n));
}

Expr Expr::variable(std::size_t index) {
  if (index == 0) throw InvalidInput("variables are numbered from 1");
  auto n = std::make_shared<Node>();
  n->kind = Kind::variable;
  n->index = index;
  n->arity = index;
  return Expr(std::move(n));
}

Expr Expr::unary(Kind k, Expr a) {
  if (k != Kind::neg && k != Kind::conj && k != Kind::abs && k != Kind::re && k != Kind::im) {
    throw InvalidInput("not a unary operator");
  }
  auto n = std::make_shared<Node>();
  n->kind = k;
  n->arity = a.arity();
  n->a = std::move(a.node_);
  return Expr(std::move(n));
}

Expr Expr::binary(Kind k, Expr a, Expr b) {
  if (k != Kind::add && k != Kind::sub && k != Kind::mul && k != Kind::div) {
    throw InvalidInput("not a binary operator");
  }
  auto n = std::make_shared<Node>();
  n->kind = k;
  n->arity = std::max(a.arity(), b.arity());
  n->a = std::move(a.node_);
  n->b = std::move(b.node_);
  return Expr(std::move(n));
}

Expr Expr::power(Expr base, double exponent, bool zero_at_origin) {
  if (!std::isfinite(exponent)) throw InvalidInput("abspow exponent must be finite");
  auto n = std::make_shared<Node>();
  n->kind = zero_at_origin ? Kind::abspow0 : Kind::abspow;
  n->real = exponent;
  n->arity = base.arity();
  n->a = std::move(base.node_);
  return Expr(std::move(n));
}

Expr Expr::phase(double theta) {
  if (!std::isfinite(theta)) throw InvalidInput("phase angle must be finite");
  auto n = std::make_shared<Node>();
  n->kind = Kind::phase;
  n->real = theta;
  return Expr(std::move(n));
}

Expr::Kind Expr::kind() const { return node_->kind; }
std::size_t Expr::arity() const { return node_->arity; }

namespace {

bool nodes_equal(const Expr::Node& a, const Expr::Node& b) {
  if (a.kind != b.kind) return false;
  switch (a.kind) {
    case Expr::Kind::literal: return a.value == b.value;
    case Expr::Kind::variable: return a.index == b.index;
    case Expr::Kind::phase: return a.real == b.real;
    case Expr::Kind::abspow:
    case Expr::Kind::abspow0: return a.real == b.real && nodes_equal(*a.a, *b.a);
    case Expr::Kind::neg:
    case Expr::Kind::conj:
    case Expr::Kind::abs:
    case Expr::Kind::re:
    case Expr::Kind::im: return nodes_equal(*a.a, *b.a);
    default: return nodes_equal(*a.a, *b.a) && nodes_equal(*a.b, *b.b);
  }
}

std::string literal_text(cplx v) {
  if (v.imag() == 0.0) return format_double(v.real());
  if (v.real() == 0.0) return format_double(v.imag()) + "i";
  return "(" + format_double(v.real()) + " + " + format_double(v.imag()) + "i)";
}

std::string print(const Expr::Node& n) {
  using K = Expr::Kind;
  switch (n.kind) {
    case K::literal: return literal_text(n.value);
    case K::variable: return "x" + std::to_string(n.index);
    case K::neg: return "-" + print(*n.a);
    case K::conj: return "conj(" + print(*n.a) + ")";
    case K::abs: return "abs(" + print(*n.a) + ")";
    case K::re: return "re(" + print(*n.a) + ")";
    case K::im: return "im(" + print(*n.a) + ")";
    case K::add: return "(" + print(*n.a) + " + " + print(*n.b) + ")";
    case K::sub: return "(" + print(*n.a) + " - " + print(*n.b) + ")";
    case K::mul: return "(" + print(*n.a) + " * " + print(*n.b) + ")";
    case K::div: return "(" + print(*n.a) + " / " + print(*n.b) + ")";
    case K::abspow: return "abspow(" + print(*n.a) + ", " + format_double(n.real) + ")";
    case K::abspow0: return "abspow0(" + print(*n.a) + ", " + format_double(n.real) + ")";
    case K::phase: return "phase(" + format_double(n.real) + ")";
  }
  return {};
}

cplx eval_node(const Expr::Node& n, std::span<const cplx> x) {
  using K = Expr::Kind;
  switch (n.kind) {
    case K::literal: return n.value;
    case K::variable: return x[n.index - 1];
    case K::neg: return -eval_node(*n.a, x);
    case K::conj: return std::conj(eval_node(*n.a, x));
    case K::abs: return std::abs(eval_node(*n.a, x));
    case K::re: return eval_node(*n.a, x).real();
    case K::im: return eval_node(*n.a, x).imag();
    case K::add: return eval_node(*n.a, x) + eval_node(*n.b, x);
    case K::sub: return eval_node(*n.a, x) - eval_node(*n.b, x);
    case K::mul: return eval_node(*n.a, x) * eval_node(*n.b, x);
    case K::div: {
      const cplx num = eval_node(*n.a, x);
      const cplx den = eval_node(*n.b, x);
      if (den == cplx(0.0, 0.0)) throw EvalError("division by zero");
      return num / den;
    }
    case K::abspow:
    case K::abspow0: {
      const double r = std::abs(eval_node(*n.a, x));
      if (r == 0.0) {
        if (n.kind == K::abspow0 || n.real > 0.0) return 0.0;
        throw EvalError("abspow(0, " + format_double(n.real) + ") is singular");
      }
      return std::pow(r, n.real);
    }
    case K::phase: return std::polar(1.0, n.real);
  }
  return {};
}

class Parser {
 public:
  Parser(const std::string& text, std::size_t d) : s_(text), d_(d) {}

  Expr parse() {
    Expr e = expr();
    skip();
    if (pos_ != s_.size()) throw ParseError("unexpected '" + std::string(1, s_[pos_]) + "'", pos_);
    return e;
  }

 private:
  using K = Expr::Kind;

  void skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char c) {
    if (!accept(c)) {
      throw ParseError(std::string("expected '") + c + "'", pos_);
    }
  }

  static bool is_literal(const Expr& e) { return e.kind() == K::literal; }
  static cplx literal_value(const Expr& e) { return e.node().value; }

  Expr expr() {
    Expr lhs = term();
    for (;;) {
      if (accept('+')) {
        Expr rhs = term();
        lhs = is_literal(lhs) && is_literal(rhs) ? Expr::literal(literal_value(lhs) + literal_value(rhs))
                                                 : Expr::binary(K::add, lhs, rhs);
      } else if (accept('-')) {
        Expr rhs = term();
        lhs = is_literal(lhs) && is_literal(rhs) ? Expr::literal(literal_value(lhs) - literal_value(rhs))
                                                 : Expr::binary(K::sub, lhs, rhs);
      } else {
        return lhs;
      }
    }
  }

  Expr term() {
    Expr lhs = unary();
    for (;;) {
      if (accept('*')) {
        lhs = Expr::binary(K::mul, lhs, unary());
      } else if (accept('/')) {
        lhs = Expr::binary(K::div, lhs, unary());
      } else {
        return lhs;
      }
    }
  }

  Expr unary() {
    if (accept('-')) {
      Expr a = unary();
      return is_literal(a) ? Expr::literal(-literal_value(a)) : Expr::unary(K::neg, a);
    }
    return primary();
  }

  double constant(const char* what) {
    const std::size_t at = (skip(), pos_);
    Expr e = expr();
    if (e.arity() != 0) throw ParseError(std::string(what) + " must not depend on variables", at);
    const cplx v = eval_node(e.node(), {});
    if (v.imag() != 0.0 || !std::isfinite(v.real())) throw ParseError(std::string(what) + " must be a finite real", at);
    return v.real();
  }

  Expr primary() {
    skip();
    if (pos_ >= s_.size()) throw ParseError("unexpected end of input", pos_);
    const char c = s_[pos_];
    if (c == '(') {
      ++pos_;
      Expr e = expr();
      expect(')');
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c))) return word();
    throw ParseError("unexpected '" + std::string(1, c) + "'", pos_);
  }

  Expr number() {
    const std::size_t start = pos_;
    const char* begin = s_.c_str() + pos_;
    char* end = nullptr;
    const double v = std::strtod(begin, &end);
    if (end == begin) throw ParseError("bad number", start);
    pos_ += static_cast<std::size_t>(end - begin);
    if (!std::isfinite(v)) throw ParseError("number out of range", start);
    if (pos_ < s_.size() && s_[pos_] == 'i' &&
        !(pos_ + 1 < s_.size() && std::isalnum(static_cast<unsigned char>(s_[pos_ + 1])))) {
      ++pos_;
      return Expr::literal({0.0, v});
    }
    return Expr::literal(v);
  }

  Expr word() {
    const std::size_t start = pos_;
    std::size_t end = pos_;
    while (end < s_.size() && std::isalnum(static_cast<unsigned char>(s_[end]))) ++end;
    const std::string w = s_.substr(pos_, end - pos_);
    pos_ = end;

    if (w == "i") return Expr::literal({0.0, 1.0});
    if (w.size() > 1 && w[0] == 'x' && w.find_first_not_of("0123456789", 1) == std::string::npos) {
      const unsigned long idx = std::stoul(w.substr(1));
      if (idx == 0) throw ParseError("variables are numbered from x1", start);
      if (idx > d_) {
        throw ParseError("variable " + w + " out of range (d = " + std::to_string(d_) + ")", start);
      }
      return Expr::variable(idx);
    }
    K k;
    if (w == "conj") {
      k = K::conj;
    } else if (w == "abs") {
      k = K::abs;
    } else if (w == "re") {
      k = K::re;
    } else if (w == "im") {
      k = K::im;
    } else if (w == "abspow" || w == "abspow0") {
      expect('(');
      Expr base = expr();
      expect(',');
      const double s = constant("abspow exponent");
      expect(')');
      return Expr::power(base, s, w == "abspow0");
    } else if (w == "phase") {
      expect('(');
      const double theta = constant("phase angle");
      expect(')');
      return Expr::phase(theta);
    } else {
      throw ParseError("unknown name '" + w + "'", start);
    }
    expect('(');
    Expr a = expr();
    expect(')');
    return Expr::unary(k, a);
  }

  const std::string& s_;
  std::size_t d_;
  std::size_t pos_ = 0;
};

}  // namespace

bool operator==(const Expr& a, const Expr& b) { return nodes_equal(*a.node_, *b.node_); }

std::string Expr::to_string() const { return print(*node_); }

Expr parse_expr(const std::string& text, std::size_t d) { return Parser(text, d).parse(); }

cplx eval_expr(const Expr& e, std::span<const cplx> x) {
  if (x.size() < e.arity()) {
    throw InvalidInput("expression needs " + std::to_string(e.arity()) + " coordinates, got " +
                       std::to_string(x.size()));
  }
  return eval_node(e.node(), x);
}

}  // namespace formlab
