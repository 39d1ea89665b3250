#include "wavemc/expr.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <numbers>
#include <utility>

#include "wavemc/format.hpp"

namespace wavemc {

namespace {

ExprNodePtr make_node(ExprKind kind, Complex value = {}, int index = 0,
                      ExprNodePtr a = nullptr, ExprNodePtr b = nullptr, int pos = 0) {
  auto n = std::make_shared<ExprNode>();
  n->kind = kind;
  n->value = value;
  n->index = index;
  n->a = std::move(a);
  n->b = std::move(b);
  n->pos = pos;
  return n;
}

ExprNodePtr const_node(Complex c, int pos = 0) {
  return make_node(ExprKind::constant, c, 0, nullptr, nullptr, pos);
}

bool is_const(const ExprNodePtr& n, Complex c) {
  return n->kind == ExprKind::constant && n->value == c;
}

// Integer power by repeated squaring; negative exponents invert.
Complex ipow(Complex base, int n, int pos) {
  const bool invert = n < 0;
  unsigned long long e = invert ? -static_cast<long long>(n) : n;
  Complex acc(1.0, 0.0);
  Complex b = base;
  while (e != 0) {
    if (e & 1ull) acc *= b;
    b *= b;
    e >>= 1;
  }
  if (invert) {
    if (acc == Complex(0.0, 0.0))
      throw NumericalError("division by zero in negative power at position " +
                           std::to_string(pos));
    return Complex(1.0, 0.0) / acc;
  }
  return acc;
}

Complex eval_node(const ExprNode* n, Complex z, std::span<const double> x) {
  switch (n->kind) {
    case ExprKind::constant:
      return n->value;
    case ExprKind::var_z:
      return z;
    case ExprKind::var_x:
      if (n->index < 0 || static_cast<std::size_t>(n->index) >= x.size())
        throw NumericalError("unbound variable x" + std::to_string(n->index + 1));
      return Complex(x[static_cast<std::size_t>(n->index)], 0.0);
    case ExprKind::add:
      return eval_node(n->a.get(), z, x) + eval_node(n->b.get(), z, x);
    case ExprKind::sub:
      return eval_node(n->a.get(), z, x) - eval_node(n->b.get(), z, x);
    case ExprKind::mul:
      return eval_node(n->a.get(), z, x) * eval_node(n->b.get(), z, x);
    case ExprKind::div: {
      const Complex den = eval_node(n->b.get(), z, x);
      if (den == Complex(0.0, 0.0))
        throw NumericalError("division by zero at position " + std::to_string(n->pos));
      return eval_node(n->a.get(), z, x) / den;
    }
    case ExprKind::pow_int:
      return ipow(eval_node(n->a.get(), z, x), n->index, n->pos);
    case ExprKind::neg:
      return -eval_node(n->a.get(), z, x);
    case ExprKind::fn_exp:
      return std::exp(eval_node(n->a.get(), z, x));
    case ExprKind::fn_sin:
      return std::sin(eval_node(n->a.get(), z, x));
    case ExprKind::fn_cos:
      return std::cos(eval_node(n->a.get(), z, x));
    case ExprKind::fn_sinh:
      return std::sinh(eval_node(n->a.get(), z, x));
    case ExprKind::fn_cosh:
      return std::cosh(eval_node(n->a.get(), z, x));
  }
  throw NumericalError("corrupt expression node");
}

ExprNodePtr simplify_node(const ExprNodePtr& n);

ExprNodePtr fold_unary(const ExprNodePtr& n, const ExprNodePtr& a) {
  if (a->kind != ExprKind::constant) return nullptr;
  switch (n->kind) {
    case ExprKind::neg:
      return const_node(-a->value);
    case ExprKind::fn_exp:
      return const_node(std::exp(a->value));
    case ExprKind::fn_sin:
      return const_node(std::sin(a->value));
    case ExprKind::fn_cos:
      return const_node(std::cos(a->value));
    case ExprKind::fn_sinh:
      return const_node(std::sinh(a->value));
    case ExprKind::fn_cosh:
      return const_node(std::cosh(a->value));
    default:
      return nullptr;
  }
}

ExprNodePtr simplify_node(const ExprNodePtr& n) {
  switch (n->kind) {
    case ExprKind::constant:
    case ExprKind::var_z:
    case ExprKind::var_x:
      return n;
    default:
      break;
  }
  ExprNodePtr a = n->a ? simplify_node(n->a) : nullptr;
  ExprNodePtr b = n->b ? simplify_node(n->b) : nullptr;

  const bool ca = a && a->kind == ExprKind::constant;
  const bool cb = b && b->kind == ExprKind::constant;

  switch (n->kind) {
    case ExprKind::add:
      if (ca && cb) return const_node(a->value + b->value);
      if (is_const(a, Complex(0, 0))) return b;
      if (is_const(b, Complex(0, 0))) return a;
      break;
    case ExprKind::sub:
      if (ca && cb) return const_node(a->value - b->value);
      if (is_const(b, Complex(0, 0))) return a;
      if (is_const(a, Complex(0, 0))) return simplify_node(make_node(ExprKind::neg, {}, 0, b));
      break;
    case ExprKind::mul:
      if (ca && cb) return const_node(a->value * b->value);
      if (is_const(a, Complex(0, 0)) || is_const(b, Complex(0, 0)))
        return const_node(Complex(0, 0));
      if (is_const(a, Complex(1, 0))) return b;
      if (is_const(b, Complex(1, 0))) return a;
      break;
    case ExprKind::div:
      if (ca && cb && b->value != Complex(0, 0)) return const_node(a->value / b->value);
      if (is_const(b, Complex(1, 0))) return a;
      break;
    case ExprKind::pow_int:
      if (n->index == 0) return const_node(Complex(1, 0));
      if (n->index == 1) return a;
      if (ca && n->index > 0) return const_node(ipow(a->value, n->index, n->pos));
      break;
    case ExprKind::neg:
      if (a->kind == ExprKind::neg) return a->a;
      [[fallthrough]];
    default:
      if (ExprNodePtr folded = fold_unary(n, a)) return folded;
      break;
  }
  if (a == n->a && b == n->b) return n;
  return make_node(n->kind, n->value, n->index, std::move(a), std::move(b), n->pos);
}

ExprNodePtr diff_node(const ExprNodePtr& n) {
  switch (n->kind) {
    case ExprKind::constant:
    case ExprKind::var_x:
      return const_node(Complex(0, 0));
    case ExprKind::var_z:
      return const_node(Complex(1, 0));
    case ExprKind::add:
      return make_node(ExprKind::add, {}, 0, diff_node(n->a), diff_node(n->b));
    case ExprKind::sub:
      return make_node(ExprKind::sub, {}, 0, diff_node(n->a), diff_node(n->b));
    case ExprKind::mul:  // a'b + ab'
      return make_node(ExprKind::add, {}, 0,
                       make_node(ExprKind::mul, {}, 0, diff_node(n->a), n->b),
                       make_node(ExprKind::mul, {}, 0, n->a, diff_node(n->b)));
    case ExprKind::div:  // (a'b - ab') / b^2
      return make_node(
          ExprKind::div, {}, 0,
          make_node(ExprKind::sub, {}, 0,
                    make_node(ExprKind::mul, {}, 0, diff_node(n->a), n->b),
                    make_node(ExprKind::mul, {}, 0, n->a, diff_node(n->b))),
          make_node(ExprKind::pow_int, {}, 2, n->b, nullptr, n->pos));
    case ExprKind::pow_int: {  // n a^{n-1} a'
      if (n->index == 0) return const_node(Complex(0, 0));
      auto reduced = make_node(ExprKind::pow_int, {}, n->index - 1, n->a, nullptr, n->pos);
      auto scaled = make_node(ExprKind::mul, {}, 0,
                              const_node(Complex(static_cast<double>(n->index), 0)),
                              std::move(reduced));
      return make_node(ExprKind::mul, {}, 0, std::move(scaled), diff_node(n->a));
    }
    case ExprKind::neg:
      return make_node(ExprKind::neg, {}, 0, diff_node(n->a));
    case ExprKind::fn_exp:
      return make_node(ExprKind::mul, {}, 0, make_node(ExprKind::fn_exp, {}, 0, n->a),
                       diff_node(n->a));
    case ExprKind::fn_sin:
      return make_node(ExprKind::mul, {}, 0, make_node(ExprKind::fn_cos, {}, 0, n->a),
                       diff_node(n->a));
    case ExprKind::fn_cos:
      return make_node(
          ExprKind::mul, {}, 0,
          make_node(ExprKind::neg, {}, 0, make_node(ExprKind::fn_sin, {}, 0, n->a)),
          diff_node(n->a));
    case ExprKind::fn_sinh:
      return make_node(ExprKind::mul, {}, 0, make_node(ExprKind::fn_cosh, {}, 0, n->a),
                       diff_node(n->a));
    case ExprKind::fn_cosh:
      return make_node(ExprKind::mul, {}, 0, make_node(ExprKind::fn_sinh, {}, 0, n->a),
                       diff_node(n->a));
  }
  throw NumericalError("corrupt expression node");
}

ExprNodePtr substitute_node(const ExprNodePtr& n, const ExprNodePtr& repl) {
  switch (n->kind) {
    case ExprKind::constant:
    case ExprKind::var_x:
      return n;
    case ExprKind::var_z:
      return repl;
    default: {
      ExprNodePtr a = n->a ? substitute_node(n->a, repl) : nullptr;
      ExprNodePtr b = n->b ? substitute_node(n->b, repl) : nullptr;
      if (a == n->a && b == n->b) return n;
      return make_node(n->kind, n->value, n->index, std::move(a), std::move(b), n->pos);
    }
  }
}

bool scan_contains_z(const ExprNode* n) {
  if (n->kind == ExprKind::var_z) return true;
  if (n->a && scan_contains_z(n->a.get())) return true;
  if (n->b && scan_contains_z(n->b.get())) return true;
  return false;
}

int scan_max_x(const ExprNode* n) {
  int m = n->kind == ExprKind::var_x ? n->index : -1;
  if (n->a) m = std::max(m, scan_max_x(n->a.get()));
  if (n->b) m = std::max(m, scan_max_x(n->b.get()));
  return m;
}

bool scan_div_by_z(const ExprNode* n) {
  if (n->kind == ExprKind::div && scan_contains_z(n->b.get())) return true;
  if (n->kind == ExprKind::pow_int && n->index < 0 && scan_contains_z(n->a.get()))
    return true;
  if (n->a && scan_div_by_z(n->a.get())) return true;
  if (n->b && scan_div_by_z(n->b.get())) return true;
  return false;
}

bool scan_complex_const(const ExprNode* n) {
  if (n->kind == ExprKind::constant && n->value.imag() != 0.0) return true;
  if (n->a && scan_complex_const(n->a.get())) return true;
  if (n->b && scan_complex_const(n->b.get())) return true;
  return false;
}

bool equal_nodes(const ExprNode* a, const ExprNode* b) {
  if (a == b) return true;
  if (a->kind != b->kind || a->index != b->index || a->value != b->value) return false;
  if (static_cast<bool>(a->a) != static_cast<bool>(b->a)) return false;
  if (static_cast<bool>(a->b) != static_cast<bool>(b->b)) return false;
  if (a->a && !equal_nodes(a->a.get(), b->a.get())) return false;
  if (a->b && !equal_nodes(a->b.get(), b->b.get())) return false;
  return true;
}

std::string format_constant(Complex c) {
  if (c.imag() == 0.0) {
    if (c.real() < 0.0 || std::signbit(c.real()))
      return "(-" + format_double(-c.real()) + ")";
    return format_double(c.real());
  }
  std::string im;
  if (c.imag() == 1.0)
    im = "i";
  else if (c.imag() == -1.0)
    im = "-i";
  else if (c.imag() < 0.0)
    im = "-" + format_double(-c.imag()) + "*i";
  else
    im = format_double(c.imag()) + "*i";
  if (c.real() == 0.0 && !std::signbit(c.real()))
    return c.imag() < 0.0 ? "(" + im + ")" : im;
  const std::string re = (c.real() < 0.0 || std::signbit(c.real()))
                             ? "-" + format_double(-c.real())
                             : format_double(c.real());
  if (c.imag() < 0.0) return "(" + re + im + ")";
  return "(" + re + "+" + im + ")";
}

// Precedence for printing: + - are 1, * / are 2, unary minus 2, ^ is 3.
void print_node(const ExprNode* n, int min_prec, std::string& out) {
  const auto wrap = [&](int prec, auto&& body) {
    const bool parens = prec < min_prec;
    if (parens) out += '(';
    body();
    if (parens) out += ')';
  };
  switch (n->kind) {
    case ExprKind::constant:
      out += format_constant(n->value);
      return;
    case ExprKind::var_z:
      out += 'z';
      return;
    case ExprKind::var_x:
      out += 'x';
      out += std::to_string(n->index + 1);
      return;
    case ExprKind::add:
      wrap(1, [&] {
        print_node(n->a.get(), 1, out);
        out += '+';
        print_node(n->b.get(), 2, out);
      });
      return;
    case ExprKind::sub:
      wrap(1, [&] {
        print_node(n->a.get(), 1, out);
        out += '-';
        print_node(n->b.get(), 2, out);
      });
      return;
    case ExprKind::mul:
      wrap(2, [&] {
        print_node(n->a.get(), 2, out);
        out += '*';
        print_node(n->b.get(), 3, out);
      });
      return;
    case ExprKind::div:
      wrap(2, [&] {
        print_node(n->a.get(), 2, out);
        out += '/';
        print_node(n->b.get(), 3, out);
      });
      return;
    case ExprKind::pow_int:
      wrap(3, [&] {
        print_node(n->a.get(), 4, out);
        out += '^';
        out += std::to_string(n->index);
      });
      return;
    case ExprKind::neg:
      wrap(2, [&] {
        out += '-';
        print_node(n->a.get(), 3, out);
      });
      return;
    case ExprKind::fn_exp:
    case ExprKind::fn_sin:
    case ExprKind::fn_cos:
    case ExprKind::fn_sinh:
    case ExprKind::fn_cosh: {
      switch (n->kind) {
        case ExprKind::fn_exp: out += "exp"; break;
        case ExprKind::fn_sin: out += "sin"; break;
        case ExprKind::fn_cos: out += "cos"; break;
        case ExprKind::fn_sinh: out += "sinh"; break;
        default: out += "cosh"; break;
      }
      out += '(';
      print_node(n->a.get(), 0, out);
      out += ')';
      return;
    }
  }
}

// ---------------------------------------------------------------------------
// Recursive-descent parser. Standard infix precedence, ^ binds tightest and
// takes an integer-literal exponent, unary minus sits between * and ^.
// Positions in errors are 1-based columns.
// ---------------------------------------------------------------------------
class Parser {
 public:
  Parser(std::string_view text, int dim, bool allow_z, bool allow_i)
      : text_(text), dim_(dim), allow_z_(allow_z), allow_i_(allow_i) {}

  ExprNodePtr parse() {
    ExprNodePtr e = parse_expression();
    skip_ws();
    if (pos_ != text_.size())
      throw ParseError("unexpected trailing input", col());
    return e;
  }

 private:
  int col() const { return static_cast<int>(pos_) + 1; }

  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_])))
      ++pos_;
  }

  bool eat(char c) {
    skip_ws();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  char peek() {
    skip_ws();
    return pos_ < text_.size() ? text_[pos_] : '\0';
  }

  ExprNodePtr parse_expression() {
    ExprNodePtr lhs = parse_term();
    for (;;) {
      if (eat('+'))
        lhs = make_node(ExprKind::add, {}, 0, lhs, parse_term());
      else if (eat('-'))
        lhs = make_node(ExprKind::sub, {}, 0, lhs, parse_term());
      else
        return lhs;
    }
  }

  ExprNodePtr parse_term() {
    ExprNodePtr lhs = parse_unary();
    for (;;) {
      if (eat('*'))
        lhs = make_node(ExprKind::mul, {}, 0, lhs, parse_unary());
      else if (peek() == '/') {
        const int p = col();
        ++pos_;
        lhs = make_node(ExprKind::div, {}, 0, lhs, parse_unary(), p);
      } else {
        return lhs;
      }
    }
  }

  ExprNodePtr parse_unary() {
    if (eat('-')) return make_node(ExprKind::neg, {}, 0, parse_unary());
    return parse_power();
  }

  ExprNodePtr parse_power() {
    ExprNodePtr base = parse_atom();
    while (eat('^')) {
      skip_ws();
      const int p = col();
      base = make_node(ExprKind::pow_int, {}, parse_int_exponent(p), base, nullptr, p);
    }
    return base;
  }

  int parse_int_exponent(int p) {
    bool negative = false;
    if (pos_ < text_.size() && (text_[pos_] == '-' || text_[pos_] == '+')) {
      negative = text_[pos_] == '-';
      ++pos_;
    }
    const std::size_t start = pos_;
    while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_])))
      ++pos_;
    if (pos_ == start)
      throw ParseError("power with non-integer exponent (expected an integer literal)", p);
    if (pos_ < text_.size() &&
        (text_[pos_] == '.' || text_[pos_] == 'e' || text_[pos_] == 'E'))
      throw ParseError("power with non-integer exponent", p);
    int value = 0;
    auto [ptr, ec] = std::from_chars(text_.data() + start, text_.data() + pos_, value);
    (void)ptr;
    if (ec != std::errc{})
      throw ParseError("exponent out of range", p);
    return negative ? -value : value;
  }

  ExprNodePtr parse_atom() {
    skip_ws();
    if (pos_ == text_.size()) throw ParseError("expected an operand", col());
    const char c = text_[pos_];
    if (c == '(') {
      ++pos_;
      ExprNodePtr e = parse_expression();
      if (!eat(')')) throw ParseError("expected ')'", col());
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return parse_identifier();
    throw ParseError(std::string("unexpected character '") + c + "'", col());
  }

  ExprNodePtr parse_number() {
    const int p = col();
    const std::size_t start = pos_;
    while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_])))
      ++pos_;
    if (pos_ < text_.size() && text_[pos_] == '.') {
      ++pos_;
      while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_])))
        ++pos_;
    }
    if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
      std::size_t mark = pos_++;
      if (pos_ < text_.size() && (text_[pos_] == '+' || text_[pos_] == '-')) ++pos_;
      if (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
        while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_])))
          ++pos_;
      } else {
        pos_ = mark;  // the 'e' belongs to an identifier, not this literal
      }
    }
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(text_.data() + start, text_.data() + pos_, value);
    if (ec != std::errc{} || ptr != text_.data() + pos_)
      throw ParseError("malformed number", p);
    return const_node(Complex(value, 0.0), p);
  }

  ExprNodePtr parse_identifier() {
    const int p = col();
    const std::size_t start = pos_;
    while (pos_ < text_.size() &&
           (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
      ++pos_;
    const std::string_view name = text_.substr(start, pos_ - start);

    if (name == "z") {
      if (!allow_z_) throw ParseError("z is not allowed in a real-valued expression", p);
      return make_node(ExprKind::var_z, {}, 0, nullptr, nullptr, p);
    }
    if (name == "i") {
      if (!allow_i_)
        throw ParseError("the imaginary unit is not allowed in a real-valued expression", p);
      return const_node(Complex(0.0, 1.0), p);
    }
    if (name == "pi") return const_node(Complex(std::numbers::pi, 0.0), p);

    if (name.size() >= 2 && name[0] == 'x') {
      int k = 0;
      auto [ptr, ec] = std::from_chars(name.data() + 1, name.data() + name.size(), k);
      if (ec == std::errc{} && ptr == name.data() + name.size()) {
        if (k < 1 || k > dim_)
          throw ParseError("variable " + std::string(name) + " out of range for dim=" +
                               std::to_string(dim_),
                           p);
        return make_node(ExprKind::var_x, {}, k - 1, nullptr, nullptr, p);
      }
    }

    ExprKind fn;
    if (name == "exp")
      fn = ExprKind::fn_exp;
    else if (name == "sin")
      fn = ExprKind::fn_sin;
    else if (name == "cos")
      fn = ExprKind::fn_cos;
    else if (name == "sinh")
      fn = ExprKind::fn_sinh;
    else if (name == "cosh")
      fn = ExprKind::fn_cosh;
    else
      throw ParseError("unknown identifier '" + std::string(name) + "'", p);

    if (!eat('(')) throw ParseError("expected '(' after function name", col());
    ExprNodePtr arg = parse_expression();
    if (!eat(')')) throw ParseError("expected ')'", col());
    return make_node(fn, {}, 0, std::move(arg), nullptr, p);
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  int dim_;
  bool allow_z_;
  bool allow_i_;
};

}  // namespace

Expr Expr::constant(Complex c) { return Expr(const_node(c)); }
Expr Expr::z() { return Expr(make_node(ExprKind::var_z)); }
Expr Expr::x(int index) { return Expr(make_node(ExprKind::var_x, {}, index)); }

Complex Expr::eval(Complex z, std::span<const double> x) const {
  return eval_node(root_.get(), z, x);
}

Expr Expr::differentiate_z() const { return Expr(simplify_node(diff_node(root_))); }

Expr Expr::simplified() const { return Expr(simplify_node(root_)); }

Expr Expr::substitute_z(const Expr& replacement) const {
  return Expr(substitute_node(root_, replacement.root_));
}

bool Expr::contains_z() const { return scan_contains_z(root_.get()); }
int Expr::max_x_index() const { return scan_max_x(root_.get()); }
bool Expr::divides_by_z() const { return scan_div_by_z(root_.get()); }
bool Expr::has_complex_constants() const { return scan_complex_const(root_.get()); }

std::string Expr::to_string() const {
  std::string out;
  print_node(root_.get(), 0, out);
  return out;
}

bool operator==(const Expr& lhs, const Expr& rhs) {
  return equal_nodes(lhs.root_.get(), rhs.root_.get());
}

Expr operator+(const Expr& a, const Expr& b) {
  return Expr(make_node(ExprKind::add, {}, 0, a.root_, b.root_));
}
Expr operator-(const Expr& a, const Expr& b) {
  return Expr(make_node(ExprKind::sub, {}, 0, a.root_, b.root_));
}
Expr operator*(const Expr& a, const Expr& b) {
  return Expr(make_node(ExprKind::mul, {}, 0, a.root_, b.root_));
}
Expr operator/(const Expr& a, const Expr& b) {
  return Expr(make_node(ExprKind::div, {}, 0, a.root_, b.root_));
}
Expr operator-(const Expr& a) { return Expr(make_node(ExprKind::neg, {}, 0, a.root_)); }
Expr pow(const Expr& base, int exponent) {
  return Expr(make_node(ExprKind::pow_int, {}, exponent, base.root_));
}
Expr exp(const Expr& a) { return Expr(make_node(ExprKind::fn_exp, {}, 0, a.root_)); }
Expr sin(const Expr& a) { return Expr(make_node(ExprKind::fn_sin, {}, 0, a.root_)); }
Expr cos(const Expr& a) { return Expr(make_node(ExprKind::fn_cos, {}, 0, a.root_)); }
Expr sinh(const Expr& a) { return Expr(make_node(ExprKind::fn_sinh, {}, 0, a.root_)); }
Expr cosh(const Expr& a) { return Expr(make_node(ExprKind::fn_cosh, {}, 0, a.root_)); }

Expr parse_expr(std::string_view text, int dim) {
  if (dim < 1) throw ConfigError("dim must be >= 1");
  return Expr(Parser(text, dim, /*allow_z=*/true, /*allow_i=*/true).parse());
}

Expr parse_real_expr(std::string_view text, int dim) {
  if (dim < 1) throw ConfigError("dim must be >= 1");
  return Expr(Parser(text, dim, /*allow_z=*/false, /*allow_i=*/false).parse());
}

Complex cauchy_derivative(const Expr& e, Complex z, std::span<const double> x, double rho,
                          int m) {
  if (rho <= 0.0) throw ConfigError("cauchy_derivative: rho must be positive");
  if (m < 8) throw ConfigError("cauchy_derivative: m must be >= 8");
  Complex acc(0.0, 0.0);
  for (int k = 0; k < m; ++k) {
    const double theta = 2.0 * std::numbers::pi * k / m;
    const Complex w(std::cos(theta), std::sin(theta));
    acc += e.eval(z + rho * w, x) * std::conj(w);
  }
  return acc / (rho * static_cast<double>(m));
}

}  // namespace wavemc
