#include "gup/expr.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <sstream>
#include <utility>

namespace gup {

// ---------------------------------------------------------------------------
// Rational helpers

std::optional<Rational> parse_rational(const std::string& text) {
  if (text.empty()) return std::nullopt;
  std::size_t i = 0;
  bool negative = false;
  if (text[i] == '+' || text[i] == '-') {
    negative = text[i] == '-';
    ++i;
  }
  if (i >= text.size() || !std::isdigit(static_cast<unsigned char>(text[i])))
    return std::nullopt;

  auto digits = [&](BigInt& out) {
    std::size_t start = i;
    out = 0;
    while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i]))) {
      out = out * 10 + (text[i] - '0');
      ++i;
    }
    return i > start;
  };

  BigInt whole;
  digits(whole);
  Rational r(whole);
  if (i < text.size() && text[i] == '.') {
    ++i;
    std::size_t start = i;
    BigInt frac;
    if (!digits(frac)) return std::nullopt;
    BigInt scale = 1;
    for (std::size_t k = start; k < i; ++k) scale *= 10;
    r += Rational(frac, scale);
  } else if (i < text.size() && text[i] == '/') {
    ++i;
    BigInt den;
    if (!digits(den) || den == 0) return std::nullopt;
    r = Rational(whole, den);
  }
  if (i != text.size()) return std::nullopt;
  return negative ? -r : r;
}

std::string rational_to_string(const Rational& r) {
  std::ostringstream os;
  os << numerator(r);
  if (denominator(r) != 1) os << '/' << denominator(r);
  return os.str();
}

// ---------------------------------------------------------------------------
// Node construction

std::string VarRef::name() const {
  return (kind == VarKind::Q ? "q" : "p") + std::to_string(index);
}

namespace {

std::shared_ptr<ExprNode> node(ExprKind k) { return std::make_shared<ExprNode>(k); }

bool is_const(const Expr& e, const Rational& v) {
  return e->kind == ExprKind::Const && e->value == v;
}

bool is_any_const(const Expr& e) { return e->kind == ExprKind::Const; }

// Exact square root of a rational, when one exists.
std::optional<Rational> rational_sqrt(const Rational& v) {
  if (v < 0) return std::nullopt;
  BigInt n = numerator(v), d = denominator(v);
  BigInt sn = sqrt(n), sd = sqrt(d);
  if (sn * sn != n || sd * sd != d) return std::nullopt;
  return Rational(sn, sd);
}

Rational rational_pow(Rational base, int e) {
  bool inv = e < 0;
  unsigned k = static_cast<unsigned>(inv ? -static_cast<long long>(e) : e);
  Rational r = 1;
  while (k) {
    if (k & 1) r *= base;
    base *= base;
    k >>= 1;
  }
  return inv ? Rational(1) / r : r;
}

}  // namespace

Expr constant(Rational v) {
  auto n = node(ExprKind::Const);
  n->value = std::move(v);
  return n;
}

Expr constant(long long v) { return constant(Rational(v)); }

Expr param(std::string name) {
  auto n = node(ExprKind::Param);
  n->name = std::move(name);
  return n;
}

Expr var(VarRef v) {
  auto n = node(ExprKind::Var);
  n->var = v;
  return n;
}

Expr qvar(int i) { return var({VarKind::Q, i}); }
Expr pvar(int i) { return var({VarKind::P, i}); }

Expr neg(Expr e) {
  if (is_any_const(e)) return constant(-e->value);
  if (e->kind == ExprKind::Neg) return e->a;
  auto n = node(ExprKind::Neg);
  n->a = std::move(e);
  return n;
}

Expr sqrt(Expr e) {
  if (is_any_const(e)) {
    if (auto r = rational_sqrt(e->value)) return constant(*r);
  }
  auto n = node(ExprKind::Sqrt);
  n->a = std::move(e);
  return n;
}

Expr exp(Expr e) {
  if (is_const(e, 0)) return constant(1);
  auto n = node(ExprKind::Exp);
  n->a = std::move(e);
  return n;
}

Expr add(Expr a, Expr b) {
  if (is_const(a, 0)) return b;
  if (is_const(b, 0)) return a;
  if (is_any_const(a) && is_any_const(b)) return constant(a->value + b->value);
  auto n = node(ExprKind::Add);
  n->a = std::move(a);
  n->b = std::move(b);
  return n;
}

Expr sub(Expr a, Expr b) {
  if (is_const(b, 0)) return a;
  if (is_const(a, 0)) return neg(std::move(b));
  if (is_any_const(a) && is_any_const(b)) return constant(a->value - b->value);
  auto n = node(ExprKind::Sub);
  n->a = std::move(a);
  n->b = std::move(b);
  return n;
}

Expr mul(Expr a, Expr b) {
  if (is_const(a, 0) || is_const(b, 0)) return constant(0);
  if (is_const(a, 1)) return b;
  if (is_const(b, 1)) return a;
  if (is_any_const(a) && is_any_const(b)) return constant(a->value * b->value);
  if (is_const(a, -1)) return neg(std::move(b));
  if (is_const(b, -1)) return neg(std::move(a));
  auto n = node(ExprKind::Mul);
  n->a = std::move(a);
  n->b = std::move(b);
  return n;
}

Expr div(Expr a, Expr b) {
  if (is_const(b, 1)) return a;
  if (is_any_const(a) && is_any_const(b) && b->value != 0)
    return constant(a->value / b->value);
  auto n = node(ExprKind::Div);
  n->a = std::move(a);
  n->b = std::move(b);
  return n;
}

Expr pow(Expr base, int exponent) {
  if (exponent == 0) return constant(1);
  if (exponent == 1) return base;
  if (is_any_const(base) && !(base->value == 0 && exponent < 0))
    return constant(rational_pow(base->value, exponent));
  auto n = node(ExprKind::Pow);
  n->a = std::move(base);
  n->exponent = exponent;
  return n;
}

// ---------------------------------------------------------------------------
// Parser

ParseError::ParseError(const std::string& what, std::size_t off)
    : std::runtime_error(what + " (at offset " + std::to_string(off) + ")"),
      offset(off) {}

namespace {

class Parser {
 public:
  explicit Parser(const std::string& text) : s_(text) {}

  Expr run() {
    Expr e = expr();
    skip_space();
    if (pos_ != s_.size()) fail("unexpected trailing input");
    return e;
  }

 private:
  const std::string& s_;
  std::size_t pos_ = 0;

  [[noreturn]] void fail(const std::string& msg) const { throw ParseError(msg, pos_); }

  void skip_space() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }

  char peek() {
    skip_space();
    return pos_ < s_.size() ? s_[pos_] : '\0';
  }

  bool consume(char c) {
    if (peek() == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  Expr expr() {
    Expr e = term();
    for (;;) {
      if (consume('+'))
        e = add(e, term());
      else if (consume('-'))
        e = sub(e, term());
      else
        return e;
    }
  }

  Expr term() {
    Expr e = unary();
    for (;;) {
      if (consume('*'))
        e = mul(e, unary());
      else if (consume('/'))
        e = div(e, unary());
      else
        return e;
    }
  }

  Expr unary() {
    if (consume('-')) return neg(unary());
    return power();
  }

  Expr power() {
    Expr base = primary();
    while (consume('^')) base = pow(base, exponent_literal());
    return base;
  }

  int exponent_literal() {
    skip_space();
    bool negative = consume('-');
    skip_space();
    std::size_t start = pos_;
    long long v = 0;
    while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) {
      v = v * 10 + (s_[pos_] - '0');
      if (v > 1'000'000) fail("exponent too large");
      ++pos_;
    }
    if (pos_ == start) fail("expected integer exponent");
    return static_cast<int>(negative ? -v : v);
  }

  Expr primary() {
    skip_space();
    if (pos_ >= s_.size()) fail("unexpected end of input");
    char c = s_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c))) return number();
    if (std::islower(static_cast<unsigned char>(c))) return identifier();
    if (c == '(') {
      ++pos_;
      Expr e = expr();
      if (!consume(')')) fail("expected ')'");
      return e;
    }
    fail(std::string("unexpected character '") + c + "'");
  }

  Expr number() {
    std::size_t start = pos_;
    while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    if (pos_ < s_.size() && s_[pos_] == '.') {
      ++pos_;
      std::size_t frac = pos_;
      while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
      if (pos_ == frac) fail("expected digits after decimal point");
    }
    auto r = parse_rational(s_.substr(start, pos_ - start));
    if (!r) fail("bad numeric literal");
    return constant(*r);
  }

  Expr identifier() {
    std::size_t start = pos_;
    while (pos_ < s_.size() &&
           (std::islower(static_cast<unsigned char>(s_[pos_])) ||
            std::isdigit(static_cast<unsigned char>(s_[pos_]))))
      ++pos_;
    std::string name = s_.substr(start, pos_ - start);

    if (peek() == '(') {
      ++pos_;
      Expr arg = expr();
      if (!consume(')')) fail("expected ')'");
      if (name == "sqrt") return gup::sqrt(arg);
      if (name == "exp") return gup::exp(arg);
      pos_ = start;
      fail("unknown function '" + name + "'");
    }

    if ((name[0] == 'q' || name[0] == 'p') && name.size() > 1 &&
        std::all_of(name.begin() + 1, name.end(),
                    [](char ch) { return std::isdigit(static_cast<unsigned char>(ch)); })) {
      if (name[1] == '0') {
        pos_ = start;
        fail("coordinate index must start from 1");
      }
      long long idx = 0;
      for (std::size_t k = 1; k < name.size(); ++k) {
        idx = idx * 10 + (name[k] - '0');
        if (idx > 1'000'000) {
          pos_ = start;
          fail("coordinate index too large");
        }
      }
      return var({name[0] == 'q' ? VarKind::Q : VarKind::P, static_cast<int>(idx)});
    }
    return param(std::move(name));
  }
};

}  // namespace

Expr parse(const std::string& text) { return Parser(text).run(); }

// ---------------------------------------------------------------------------
// Printer

namespace {

// Precedence levels used for minimal parenthesization.
constexpr int kPrecAdd = 1;
constexpr int kPrecMul = 2;
constexpr int kPrecNeg = 3;
constexpr int kPrecPow = 4;
constexpr int kPrecAtom = 5;

int precedence(const Expr& e) {
  switch (e->kind) {
    case ExprKind::Add:
    case ExprKind::Sub:
      return kPrecAdd;
    case ExprKind::Mul:
    case ExprKind::Div:
      return kPrecMul;
    case ExprKind::Neg:
      return kPrecNeg;
    case ExprKind::Pow:
      return kPrecPow;
    case ExprKind::Const:
      if (e->value < 0) return kPrecNeg;
      if (!is_integer(e->value)) return kPrecMul;  // prints as num/den
      return kPrecAtom;
    default:
      return kPrecAtom;
  }
}

void print(std::ostream& os, const Expr& e, int ctx) {
  bool parens = precedence(e) < ctx;
  if (parens) os << '(';
  switch (e->kind) {
    case ExprKind::Const:
      os << rational_to_string(e->value);
      break;
    case ExprKind::Param:
      os << e->name;
      break;
    case ExprKind::Var:
      os << e->var.name();
      break;
    case ExprKind::Neg:
      os << '-';
      print(os, e->a, kPrecNeg);
      break;
    case ExprKind::Sqrt:
      os << "sqrt(";
      print(os, e->a, 0);
      os << ')';
      break;
    case ExprKind::Exp:
      os << "exp(";
      print(os, e->a, 0);
      os << ')';
      break;
    case ExprKind::Add:
      print(os, e->a, kPrecAdd);
      os << " + ";
      print(os, e->b, kPrecAdd);
      break;
    case ExprKind::Sub:
      print(os, e->a, kPrecAdd);
      os << " - ";
      print(os, e->b, kPrecAdd + 1);
      break;
    case ExprKind::Mul:
      print(os, e->a, kPrecMul);
      os << '*';
      print(os, e->b, kPrecMul);
      break;
    case ExprKind::Div:
      print(os, e->a, kPrecMul);
      os << '/';
      print(os, e->b, kPrecMul + 1);
      break;
    case ExprKind::Pow:
      print(os, e->a, kPrecAtom);
      os << '^' << e->exponent;
      break;
  }
  if (parens) os << ')';
}

}  // namespace

std::string to_string(const Expr& e) {
  std::ostringstream os;
  print(os, e, 0);
  return os.str();
}

// ---------------------------------------------------------------------------
// Evaluation

namespace {

[[noreturn]] void eval_fail(const std::string& msg, const Expr& e) {
  throw EvalError(msg + " in '" + to_string(e) + "'");
}

}  // namespace

double eval(const Expr& e, const PhasePoint& x) {
  switch (e->kind) {
    case ExprKind::Const:
      return to_double(e->value);
    case ExprKind::Param: {
      auto it = x.params.find(e->name);
      if (it == x.params.end()) eval_fail("unbound parameter '" + e->name + "'", e);
      return it->second;
    }
    case ExprKind::Var: {
      const auto& v = e->var.kind == VarKind::Q ? x.q : x.p;
      if (e->var.index < 1 || e->var.index > static_cast<int>(v.size()))
        eval_fail("coordinate " + e->var.name() + " out of range for dimension " +
                      std::to_string(x.dim()),
                  e);
      return v[e->var.index - 1];
    }
    case ExprKind::Neg:
      return -eval(e->a, x);
    case ExprKind::Sqrt: {
      double v = eval(e->a, x);
      if (v < 0) eval_fail("sqrt of negative value " + std::to_string(v), e);
      return std::sqrt(v);
    }
    case ExprKind::Exp:
      return std::exp(eval(e->a, x));
    case ExprKind::Add:
      return eval(e->a, x) + eval(e->b, x);
    case ExprKind::Sub:
      return eval(e->a, x) - eval(e->b, x);
    case ExprKind::Mul:
      return eval(e->a, x) * eval(e->b, x);
    case ExprKind::Div: {
      double den = eval(e->b, x);
      if (den == 0) eval_fail("division by zero", e);
      return eval(e->a, x) / den;
    }
    case ExprKind::Pow: {
      double base = eval(e->a, x);
      if (base == 0 && e->exponent < 0) eval_fail("zero raised to negative power", e);
      return std::pow(base, e->exponent);
    }
  }
  eval_fail("corrupt node", e);
}

// ---------------------------------------------------------------------------
// Differentiation

namespace {

// Derivative against an abstract leaf test: returns 1 for the matching leaf,
// 0 for other leaves.
template <class Match>
Expr diff_impl(const Expr& e, const Match& match) {
  switch (e->kind) {
    case ExprKind::Const:
      return constant(0);
    case ExprKind::Param:
    case ExprKind::Var:
      return constant(match(e) ? 1 : 0);
    case ExprKind::Neg:
      return neg(diff_impl(e->a, match));
    case ExprKind::Sqrt:
      // d sqrt(u) = u' / (2 sqrt(u))
      return div(diff_impl(e->a, match), mul(constant(2), sqrt(e->a)));
    case ExprKind::Exp:
      return mul(diff_impl(e->a, match), exp(e->a));
    case ExprKind::Add:
      return add(diff_impl(e->a, match), diff_impl(e->b, match));
    case ExprKind::Sub:
      return sub(diff_impl(e->a, match), diff_impl(e->b, match));
    case ExprKind::Mul:
      return add(mul(diff_impl(e->a, match), e->b), mul(e->a, diff_impl(e->b, match)));
    case ExprKind::Div:
      // (u/v)' = (u'v - uv') / v^2
      return div(sub(mul(diff_impl(e->a, match), e->b), mul(e->a, diff_impl(e->b, match))),
                 pow(e->b, 2));
    case ExprKind::Pow:
      // (u^n)' = n u^(n-1) u'
      return mul(mul(constant(e->exponent), pow(e->a, e->exponent - 1)),
                 diff_impl(e->a, match));
  }
  throw EvalError("corrupt node in diff");
}

}  // namespace

Expr diff(const Expr& e, VarRef v) {
  return diff_impl(e, [&](const Expr& leaf) {
    return leaf->kind == ExprKind::Var && leaf->var == v;
  });
}

Expr diff_param(const Expr& e, const std::string& name) {
  return diff_impl(e, [&](const Expr& leaf) {
    return leaf->kind == ExprKind::Param && leaf->name == name;
  });
}

// ---------------------------------------------------------------------------
// Substitution

namespace {

// Rebuilds only along changed paths; untouched subtrees are shared.
Expr subst_impl(const Expr& e, const std::map<std::string, Expr>& b, bool& changed) {
  switch (e->kind) {
    case ExprKind::Const:
      return e;
    case ExprKind::Param: {
      auto it = b.find(e->name);
      if (it == b.end()) return e;
      changed = true;
      return it->second;
    }
    case ExprKind::Var: {
      auto it = b.find(e->var.name());
      if (it == b.end()) return e;
      changed = true;
      return it->second;
    }
    default: {
      bool ca = false, cb = false;
      Expr a = e->a ? subst_impl(e->a, b, ca) : nullptr;
      Expr bb = e->b ? subst_impl(e->b, b, cb) : nullptr;
      if (!ca && !cb) return e;
      changed = true;
      auto n = std::make_shared<ExprNode>(e->kind);
      n->a = a;
      n->b = bb;
      n->exponent = e->exponent;
      return n;
    }
  }
}

}  // namespace

Expr substitute(const Expr& e, const std::map<std::string, Expr>& bindings) {
  bool changed = false;
  return subst_impl(e, bindings, changed);
}

// ---------------------------------------------------------------------------
// Simplification

namespace {

void flatten_add(const Expr& e, bool negate, std::vector<std::pair<Expr, bool>>& out) {
  if (e->kind == ExprKind::Add) {
    flatten_add(e->a, negate, out);
    flatten_add(e->b, negate, out);
  } else if (e->kind == ExprKind::Sub) {
    flatten_add(e->a, negate, out);
    flatten_add(e->b, !negate, out);
  } else if (e->kind == ExprKind::Neg) {
    flatten_add(e->a, !negate, out);
  } else {
    out.emplace_back(e, negate);
  }
}

void flatten_mul(const Expr& e, bool& negate, std::vector<Expr>& out) {
  if (e->kind == ExprKind::Mul) {
    flatten_mul(e->a, negate, out);
    flatten_mul(e->b, negate, out);
  } else if (e->kind == ExprKind::Neg) {
    negate = !negate;
    flatten_mul(e->a, negate, out);
  } else {
    out.push_back(e);
  }
}

}  // namespace

Expr simplify(const Expr& e) {
  switch (e->kind) {
    case ExprKind::Const:
    case ExprKind::Param:
    case ExprKind::Var:
      return e;
    case ExprKind::Sqrt:
      return sqrt(simplify(e->a));
    case ExprKind::Exp:
      return exp(simplify(e->a));
    case ExprKind::Div:
      return div(simplify(e->a), simplify(e->b));
    case ExprKind::Pow:
      return pow(simplify(e->a), e->exponent);
    case ExprKind::Add:
    case ExprKind::Sub: {
      std::vector<std::pair<Expr, bool>> leaves;
      flatten_add(e, false, leaves);
      Rational c = 0;
      Expr acc;
      // leaves may grow: a leaf that simplifies into a sum is folded back
      // into this pass, otherwise its inner constant would only surface on a
      // second call and the result would not be a fixpoint
      for (std::size_t i = 0; i < leaves.size(); ++i) {
        auto [leaf, negated] = leaves[i];
        Expr s = simplify(leaf);
        if (s->kind == ExprKind::Add || s->kind == ExprKind::Sub || s->kind == ExprKind::Neg) {
          flatten_add(s, negated, leaves);
          continue;
        }
        if (s->kind == ExprKind::Const) {
          c += negated ? -s->value : s->value;
          continue;
        }
        Expr signedleaf = negated ? neg(s) : s;
        acc = acc ? (negated ? sub(acc, s) : add(acc, s)) : signedleaf;
      }
      if (!acc) return constant(c);
      return c == 0 ? acc : (c < 0 ? sub(acc, constant(-c)) : add(acc, constant(c)));
    }
    case ExprKind::Neg:
    case ExprKind::Mul: {
      std::vector<Expr> leaves;
      bool negate = false;
      flatten_mul(e, negate, leaves);
      Rational c = 1;
      Expr acc;
      for (std::size_t i = 0; i < leaves.size(); ++i) {
        Expr s = simplify(leaves[i]);
        if (s->kind == ExprKind::Mul || s->kind == ExprKind::Neg) {
          flatten_mul(s, negate, leaves);
          continue;
        }
        if (s->kind == ExprKind::Const) {
          c *= s->value;
          if (c == 0) return constant(0);
          continue;
        }
        acc = acc ? mul(acc, s) : s;
      }
      if (negate) c = -c;
      if (!acc) return constant(c);
      return mul(constant(c), acc);
    }
  }
  return e;
}

// ---------------------------------------------------------------------------

bool structural_equal(const Expr& a, const Expr& b) {
  if (a.get() == b.get()) return true;
  if (a->kind != b->kind) return false;
  switch (a->kind) {
    case ExprKind::Const:
      return a->value == b->value;
    case ExprKind::Param:
      return a->name == b->name;
    case ExprKind::Var:
      return a->var == b->var;
    case ExprKind::Pow:
      return a->exponent == b->exponent && structural_equal(a->a, b->a);
    case ExprKind::Neg:
    case ExprKind::Sqrt:
    case ExprKind::Exp:
      return structural_equal(a->a, b->a);
    default:
      return structural_equal(a->a, b->a) && structural_equal(a->b, b->b);
  }
}

namespace {

void collect(const Expr& e, SymbolSet& out) {
  switch (e->kind) {
    case ExprKind::Param:
      out.params.insert(e->name);
      return;
    case ExprKind::Var:
      out.vars.insert(e->var);
      return;
    default:
      if (e->a) collect(e->a, out);
      if (e->b) collect(e->b, out);
  }
}

}  // namespace

SymbolSet collect_symbols(const Expr& e) {
  SymbolSet s;
  collect(e, s);
  return s;
}

}  // namespace gup
