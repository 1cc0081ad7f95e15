#ifndef SHUBIN_EXPRESSION_HPP
#define SHUBIN_EXPRESSION_HPP

#include <algorithm>
#include <cctype>
#include <cmath>
#include <complex>
#include <memory>
#include <numbers>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>

#include "shubin/symbol.hpp"

// Symbol expressions for batch configs. Vocabulary:
//   numbers, pi, i          constants (i is the imaginary unit)
//   x, xi (or the UTF-8 xi) phase-space coordinates
//   + - * /                 sums and products; division only by constants
//   e^k                     non-negative integer powers
//   jb(p)                   (1 + x^2 + xi^2)^(p/2) for a constant real p
// Every expression has exact derivatives of all orders.

namespace shubin {

class ExpressionError : public std::invalid_argument {
 public:
  ExpressionError(const std::string& what, std::size_t position)
      : std::invalid_argument(what + " at offset " + std::to_string(position)), position_(position) {}
  std::size_t position() const { return position_; }

 private:
  std::size_t position_;
};

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

struct Expr {
  enum class Kind { constant, x, xi, sum, product, bracket };
  Kind kind = Kind::constant;
  Complex value{};        // constant
  double exponent = 0.0;  // bracket p
  ExprPtr lhs, rhs;       // sum, product

  static ExprPtr make_constant(Complex c) {
    auto e = std::make_shared<Expr>();
    e->value = c;
    return e;
  }
  static ExprPtr make_leaf(Kind k) {
    auto e = std::make_shared<Expr>();
    e->kind = k;
    return e;
  }
  static ExprPtr make_bracket(double p) {
    auto e = std::make_shared<Expr>();
    e->kind = Kind::bracket;
    e->exponent = p;
    return e;
  }
  static ExprPtr make_binary(Kind k, ExprPtr a, ExprPtr b) {
    auto e = std::make_shared<Expr>();
    e->kind = k;
    e->lhs = std::move(a);
    e->rhs = std::move(b);
    return e;
  }
};

inline Complex evaluate(const Expr& e, double x, double xi) {
  switch (e.kind) {
    case Expr::Kind::constant: return e.value;
    case Expr::Kind::x: return x;
    case Expr::Kind::xi: return xi;
    case Expr::Kind::sum: return evaluate(*e.lhs, x, xi) + evaluate(*e.rhs, x, xi);
    case Expr::Kind::product: return evaluate(*e.lhs, x, xi) * evaluate(*e.rhs, x, xi);
    case Expr::Kind::bracket: return std::pow(1.0 + x * x + xi * xi, 0.5 * e.exponent);
  }
  return 0.0;
}

inline Complex differentiate(const Expr& e, int alpha, int beta, double x, double xi) {
  if (alpha == 0 && beta == 0) return evaluate(e, x, xi);
  switch (e.kind) {
    case Expr::Kind::constant: return 0.0;
    case Expr::Kind::x: return (alpha == 1 && beta == 0) ? 1.0 : 0.0;
    case Expr::Kind::xi: return (alpha == 0 && beta == 1) ? 1.0 : 0.0;
    case Expr::Kind::sum:
      return differentiate(*e.lhs, alpha, beta, x, xi) + differentiate(*e.rhs, alpha, beta, x, xi);
    case Expr::Kind::product: {
      Complex total = 0.0;
      for (int i = 0; i <= alpha; ++i)
        for (int j = 0; j <= beta; ++j) {
          const Complex left = differentiate(*e.lhs, i, j, x, xi);
          if (left == 0.0) continue;
          total += detail::binomial(alpha, i) * detail::binomial(beta, j) * left *
                   differentiate(*e.rhs, alpha - i, beta - j, x, xi);
        }
      return total;
    }
    case Expr::Kind::bracket: return bracket_partial(e.exponent, alpha, beta, x, xi);
  }
  return 0.0;
}

// Isotropic order implied by the expression's structure.
inline double structural_order(const Expr& e) {
  switch (e.kind) {
    case Expr::Kind::constant: return 0.0;
    case Expr::Kind::x:
    case Expr::Kind::xi: return 1.0;
    case Expr::Kind::sum: return std::max(structural_order(*e.lhs), structural_order(*e.rhs));
    case Expr::Kind::product: return structural_order(*e.lhs) + structural_order(*e.rhs);
    case Expr::Kind::bracket: return e.exponent;
  }
  return 0.0;
}

namespace detail {

class ExpressionParser {
 public:
  explicit ExpressionParser(std::string_view text) : text_(text) {}

  ExprPtr parse() {
    ExprPtr e = parse_sum();
    skip_space();
    if (pos_ != text_.size()) throw ExpressionError("unexpected trailing input", pos_);
    return e;
  }

 private:
  static bool is_constant(const ExprPtr& e) { return e->kind == Expr::Kind::constant; }

  static ExprPtr add(ExprPtr a, ExprPtr b) {
    if (is_constant(a) && is_constant(b)) return Expr::make_constant(a->value + b->value);
    return Expr::make_binary(Expr::Kind::sum, std::move(a), std::move(b));
  }
  static ExprPtr multiply(ExprPtr a, ExprPtr b) {
    if (is_constant(a) && is_constant(b)) return Expr::make_constant(a->value * b->value);
    return Expr::make_binary(Expr::Kind::product, std::move(a), std::move(b));
  }

  void skip_space() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_space();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char c) {
    if (!accept(c)) throw ExpressionError(std::string("expected '") + c + "'", pos_);
  }

  ExprPtr parse_sum() {
    ExprPtr e = parse_term();
    for (;;) {
      if (accept('+')) {
        e = add(e, parse_term());
      } else if (accept('-')) {
        e = add(e, multiply(Expr::make_constant(-1.0), parse_term()));
      } else {
        return e;
      }
    }
  }

  ExprPtr parse_term() {
    ExprPtr e = parse_unary();
    for (;;) {
      if (accept('*')) {
        e = multiply(e, parse_unary());
      } else if (accept('/')) {
        const std::size_t at = pos_;
        ExprPtr d = parse_unary();
        if (!is_constant(d)) throw ExpressionError("division only by constants", at);
        if (d->value == 0.0) throw ExpressionError("division by zero", at);
        e = multiply(e, Expr::make_constant(1.0 / d->value));
      } else {
        return e;
      }
    }
  }

  ExprPtr parse_unary() {
    if (accept('-')) return multiply(Expr::make_constant(-1.0), parse_unary());
    if (accept('+')) return parse_unary();
    return parse_power();
  }

  ExprPtr parse_power() {
    ExprPtr base = parse_primary();
    if (!accept('^')) return base;
    const std::size_t at = pos_;
    ExprPtr ex = parse_unary();
    if (!is_constant(ex) || ex->value.imag() != 0.0)
      throw ExpressionError("exponent must be a real constant", at);
    const double k = ex->value.real();
    if (is_constant(base)) return Expr::make_constant(std::pow(base->value, k));
    if (k < 0.0 || k != std::floor(k) || k > 64.0)
      throw ExpressionError("only non-negative integer powers of non-constant terms (use jb(p))", at);
    ExprPtr result = Expr::make_constant(1.0);
    for (int n = 0; n < static_cast<int>(k); ++n)
      result = (n == 0) ? base : multiply(result, base);
    return result;
  }

  std::string identifier() {
    std::string id;
    while (pos_ < text_.size() && (std::isalpha(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
      id.push_back(text_[pos_++]);
    return id;
  }

  ExprPtr parse_primary() {
    skip_space();
    if (pos_ >= text_.size()) throw ExpressionError("unexpected end of expression", pos_);
    const char c = text_[pos_];
    if (c == '(') {
      ++pos_;
      ExprPtr e = parse_sum();
      expect(')');
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
    // UTF-8 for the Greek letter xi (U+03BE)
    if (text_.substr(pos_, 2) == "\xCE\xBE") {
      pos_ += 2;
      return Expr::make_leaf(Expr::Kind::xi);
    }
    const std::size_t at = pos_;
    const std::string id = identifier();
    if (id == "x") return Expr::make_leaf(Expr::Kind::x);
    if (id == "xi") return Expr::make_leaf(Expr::Kind::xi);
    if (id == "i") return Expr::make_constant(Complex(0.0, 1.0));
    if (id == "pi") return Expr::make_constant(std::numbers::pi);
    if (id == "jb") {
      expect('(');
      const std::size_t arg_at = pos_;
      ExprPtr p = parse_sum();
      expect(')');
      if (!is_constant(p) || p->value.imag() != 0.0)
        throw ExpressionError("jb() exponent must be a real constant", arg_at);
      return Expr::make_bracket(p->value.real());
    }
    if (id.empty()) throw ExpressionError(std::string("unexpected character '") + c + "'", at);
    throw ExpressionError("unknown identifier '" + id + "'", at);
  }

  ExprPtr parse_number() {
    const std::size_t at = pos_;
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(std::string(text_.substr(pos_)), &used);
    } catch (const std::exception&) {
      throw ExpressionError("malformed number", at);
    }
    pos_ += used;
    return Expr::make_constant(v);
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

}  // namespace detail

inline ExprPtr parse_expression(std::string_view text) { return detail::ExpressionParser(text).parse(); }

// Symbol for an expression; the declared order defaults to the structural one.
inline Symbol parse_symbol(std::string_view text) {
  ExprPtr e = parse_expression(text);
  const double order = structural_order(*e);
  return Symbol([e](double x, double xi) { return evaluate(*e, x, xi); }, order,
                [e](int a, int b, double x, double xi) { return differentiate(*e, a, b, x, xi); },
                std::string(text));
}

}  // namespace shubin

#endif  // SHUBIN_EXPRESSION_HPP
