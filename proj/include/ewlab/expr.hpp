#ifndef EWLAB_EXPR_HPP
#define EWLAB_EXPR_HPP

// Small expression language for user-defined scalar fields.
//
// Grammar: reals, coordinate names, + - * / ^, unary minus, parentheses and
// the functions exp, log, sqrt, sin, cos, tan, sinh, cosh, atan.  '^' is
// right associative and its exponent must be a constant integer or
// half-integer.  Everything else is left associative with the usual
// precedence.

#include <cctype>
#include <cmath>
#include <cstddef>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "ewlab/jet.hpp"

namespace ewlab {

struct ParseError {
  std::size_t offset;  // byte offset into the source text
  std::string message;
};

class Expr {
 public:
  enum class Kind { Const, Var, Neg, Add, Sub, Mul, Div, Pow, Call };

  Kind kind = Kind::Const;
  double cval = 0.0;      // Const
  int var = 0;            // Var: coordinate index
  int twice_exp = 0;      // Pow: exponent in half-integer units
  std::string func;       // Call
  std::shared_ptr<const Expr> a, b;

  template <class T>
  T eval(const std::array<T, 3>& x) const {
    switch (kind) {
      case Kind::Const:
        return T(cval);
      case Kind::Var:
        return x[static_cast<std::size_t>(var)];
      case Kind::Neg:
        return -a->eval(x);
      case Kind::Add:
        return a->eval(x) + b->eval(x);
      case Kind::Sub:
        return a->eval(x) - b->eval(x);
      case Kind::Mul:
        return a->eval(x) * b->eval(x);
      case Kind::Div:
        return a->eval(x) / b->eval(x);
      case Kind::Pow:
        return pow_half(a->eval(x));
      case Kind::Call:
        return call(a->eval(x));
    }
    return T(0);
  }

  std::string print() const {
    std::ostringstream os;
    print_to(os);
    return os.str();
  }

  bool equal(const Expr& o) const {
    if (kind != o.kind) return false;
    switch (kind) {
      case Kind::Const:
        return cval == o.cval;
      case Kind::Var:
        return var == o.var;
      case Kind::Neg:
        return a->equal(*o.a);
      case Kind::Pow:
        return twice_exp == o.twice_exp && a->equal(*o.a);
      case Kind::Call:
        return func == o.func && a->equal(*o.a);
      default:
        return a->equal(*o.a) && b->equal(*o.b);
    }
  }

 private:
  double pow_half(double v) const {
    return std::pow(v, 0.5 * twice_exp);
  }
  Jet pow_half(const Jet& v) const { return pow_halfint(v, twice_exp); }

  static double apply(const std::string& f, double v) {
    if (f == "exp") return std::exp(v);
    if (f == "log") return std::log(v);
    if (f == "sqrt") return std::sqrt(v);
    if (f == "sin") return std::sin(v);
    if (f == "cos") return std::cos(v);
    if (f == "tan") return std::tan(v);
    if (f == "sinh") return std::sinh(v);
    if (f == "cosh") return std::cosh(v);
    return std::atan(v);
  }
  static Jet apply(const std::string& f, const Jet& v) {
    if (f == "exp") return exp(v);
    if (f == "log") return log(v);
    if (f == "sqrt") return sqrt(v);
    if (f == "sin") return sin(v);
    if (f == "cos") return cos(v);
    if (f == "tan") return tan(v);
    if (f == "sinh") return sinh(v);
    if (f == "cosh") return cosh(v);
    return atan(v);
  }
  template <class T>
  T call(const T& v) const {
    return apply(func, v);
  }

  void print_to(std::ostringstream& os) const;
};

using ExprPtr = std::shared_ptr<const Expr>;

inline void Expr::print_to(std::ostringstream& os) const {
  static const char* names[3] = {"$0", "$1", "$2"};
  (void)names;
  switch (kind) {
    case Kind::Const: {
      std::ostringstream t;
      t.precision(17);
      t << cval;
      os << t.str();
      break;
    }
    case Kind::Var:
      os << "@" << var;  // re-substituted by print(chart) below
      break;
    case Kind::Neg:
      os << "(-";
      a->print_to(os);
      os << ")";
      break;
    case Kind::Add:
      os << "(";
      a->print_to(os);
      os << "+";
      b->print_to(os);
      os << ")";
      break;
    case Kind::Sub:
      os << "(";
      a->print_to(os);
      os << "-";
      b->print_to(os);
      os << ")";
      break;
    case Kind::Mul:
      os << "(";
      a->print_to(os);
      os << "*";
      b->print_to(os);
      os << ")";
      break;
    case Kind::Div:
      os << "(";
      a->print_to(os);
      os << "/";
      b->print_to(os);
      os << ")";
      break;
    case Kind::Pow:
      os << "(";
      a->print_to(os);
      if (twice_exp % 2 == 0) {
        os << "^" << (twice_exp / 2 >= 0 ? "" : "(")
           << std::to_string(twice_exp / 2) << (twice_exp / 2 >= 0 ? "" : ")");
      } else {
        std::ostringstream t;
        t << (twice_exp >= 0 ? "" : "(") << 0.5 * twice_exp
          << (twice_exp >= 0 ? "" : ")");
        os << "^" << t.str();
      }
      os << ")";
      break;
    case Kind::Call:
      os << func << "(";
      a->print_to(os);
      os << ")";
      break;
  }
}

namespace detail {

inline const std::vector<std::string>& builtin_functions() {
  static const std::vector<std::string> fns = {
      "exp", "log", "sqrt", "sin", "cos", "tan", "sinh", "cosh", "atan"};
  return fns;
}

class Parser {
 public:
  Parser(const std::string& text, const std::array<std::string, 3>& coords)
      : s_(text), coords_(coords) {}

  ExprPtr parse() {
    auto e = parse_sum();
    skip_ws();
    if (pos_ != s_.size())
      throw ParseError{pos_, "unexpected trailing input"};
    return e;
  }

 private:
  const std::string& s_;
  std::array<std::string, 3> coords_;
  std::size_t pos_ = 0;

  void skip_ws() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_])))
      ++pos_;
  }
  bool eat(char c) {
    skip_ws();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }
  char peek() {
    skip_ws();
    return pos_ < s_.size() ? s_[pos_] : '\0';
  }

  static ExprPtr node(Expr e) { return std::make_shared<Expr>(std::move(e)); }

  ExprPtr parse_sum() {
    auto e = parse_product();
    for (;;) {
      if (eat('+')) {
        Expr n;
        n.kind = Expr::Kind::Add;
        n.a = e;
        n.b = parse_product();
        e = node(std::move(n));
      } else if (eat('-')) {
        Expr n;
        n.kind = Expr::Kind::Sub;
        n.a = e;
        n.b = parse_product();
        e = node(std::move(n));
      } else {
        return e;
      }
    }
  }

  ExprPtr parse_product() {
    auto e = parse_unary();
    for (;;) {
      if (eat('*')) {
        Expr n;
        n.kind = Expr::Kind::Mul;
        n.a = e;
        n.b = parse_unary();
        e = node(std::move(n));
      } else if (eat('/')) {
        Expr n;
        n.kind = Expr::Kind::Div;
        n.a = e;
        n.b = parse_unary();
        e = node(std::move(n));
      } else {
        return e;
      }
    }
  }

  ExprPtr parse_unary() {
    if (eat('-')) {
      Expr n;
      n.kind = Expr::Kind::Neg;
      n.a = parse_unary();
      return node(std::move(n));
    }
    return parse_power();
  }

  ExprPtr parse_power() {
    auto base = parse_atom();
    skip_ws();
    if (!eat('^')) return base;
    const std::size_t at = pos_;
    int twice = parse_half_integer_exponent();
    Expr n;
    n.kind = Expr::Kind::Pow;
    n.a = base;
    n.twice_exp = twice;
    (void)at;
    return node(std::move(n));
  }

  // exponent: [-] digits [ .5 ] or [-] digits/2 style "3/2" is not accepted;
  // accepted forms: 2, -3, 0.5, 1.5, -2.5
  int parse_half_integer_exponent() {
    skip_ws();
    const std::size_t start = pos_;
    bool neg = false;
    if (eat('-')) neg = true;
    skip_ws();
    std::size_t p = pos_;
    while (p < s_.size() &&
           (std::isdigit(static_cast<unsigned char>(s_[p])) || s_[p] == '.'))
      ++p;
    if (p == pos_) {
      // allow a parenthesised constant exponent, e.g. x^(-1)
      if (peek() == '(') {
        eat('(');
        int inner = parse_half_integer_exponent();
        if (!eat(')')) throw ParseError{pos_, "expected ')' in exponent"};
        return neg ? -inner : inner;
      }
      throw ParseError{start, "exponent must be a numeric constant"};
    }
    const std::string tok = s_.substr(pos_, p - pos_);
    pos_ = p;
    double v = 0.0;
    try {
      v = std::stod(tok);
    } catch (...) {
      throw ParseError{start, "malformed exponent"};
    }
    const double tw = 2.0 * v;
    if (tw != std::nearbyint(tw))
      throw ParseError{start,
                       "exponent must be an integer or half-integer constant"};
    int twice = static_cast<int>(std::nearbyint(tw));
    return neg ? -twice : twice;
  }

  ExprPtr parse_atom() {
    skip_ws();
    if (pos_ >= s_.size()) throw ParseError{pos_, "unexpected end of input"};
    const char c = s_[pos_];
    if (c == '(') {
      ++pos_;
      auto e = parse_sum();
      if (!eat(')')) throw ParseError{pos_, "expected ')'"};
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      const std::size_t start = pos_;
      std::size_t p = pos_;
      while (p < s_.size() &&
             (std::isdigit(static_cast<unsigned char>(s_[p])) || s_[p] == '.' ||
              s_[p] == 'e' || s_[p] == 'E' ||
              ((s_[p] == '+' || s_[p] == '-') && p > pos_ &&
               (s_[p - 1] == 'e' || s_[p - 1] == 'E'))))
        ++p;
      const std::string tok = s_.substr(pos_, p - pos_);
      pos_ = p;
      Expr n;
      n.kind = Expr::Kind::Const;
      try {
        n.cval = std::stod(tok);
      } catch (...) {
        throw ParseError{start, "malformed number"};
      }
      return node(std::move(n));
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      const std::size_t start = pos_;
      std::size_t p = pos_;
      while (p < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[p])) ||
                               s_[p] == '_'))
        ++p;
      const std::string name = s_.substr(pos_, p - pos_);
      pos_ = p;
      skip_ws();
      const bool is_call = pos_ < s_.size() && s_[pos_] == '(';
      for (const auto& f : builtin_functions()) {
        if (name == f) {
          if (!is_call)
            throw ParseError{start, "function '" + name + "' needs arguments"};
          eat('(');
          auto arg = parse_sum();
          if (eat(',')) throw ParseError{pos_ - 1, "'" + name + "' takes one argument"};
          if (!eat(')')) throw ParseError{pos_, "expected ')'"};
          Expr n;
          n.kind = Expr::Kind::Call;
          n.func = name;
          n.a = arg;
          return node(std::move(n));
        }
      }
      if (is_call)
        throw ParseError{start, "unknown function '" + name + "'"};
      for (int i = 0; i < 3; ++i) {
        if (name == coords_[i]) {
          Expr n;
          n.kind = Expr::Kind::Var;
          n.var = i;
          return node(std::move(n));
        }
      }
      throw ParseError{start, "unknown identifier '" + name + "'"};
    }
    throw ParseError{pos_, std::string("unexpected character '") + c + "'"};
  }
};

}  // namespace detail

inline ExprPtr parse_expression_text(const std::string& text,
                                     const std::array<std::string, 3>& coords) {
  detail::Parser p(text, coords);
  return p.parse();
}

// Canonical printing with the chart's coordinate names restored.
inline std::string print_expression(const Expr& e,
                                    const std::array<std::string, 3>& coords) {
  std::string s = e.print();
  for (int i = 0; i < 3; ++i) {
    const std::string tag = "@" + std::to_string(i);
    std::size_t pos = 0;
    while ((pos = s.find(tag, pos)) != std::string::npos) {
      s.replace(pos, tag.size(), coords[static_cast<std::size_t>(i)]);
      pos += coords[static_cast<std::size_t>(i)].size();
    }
  }
  return s;
}

}  // namespace ewlab

#endif
