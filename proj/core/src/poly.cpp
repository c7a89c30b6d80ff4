#include "gup/poly.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace gup {

MultiPoly MultiPoly::constant(int nvars, Rational c) {
  MultiPoly p(nvars);
  if (c != 0) p.terms_[Mono(nvars, 0)] = std::move(c);
  return p;
}

MultiPoly MultiPoly::variable(int nvars, int i) {
  MultiPoly p(nvars);
  Mono m(nvars, 0);
  m[i] = 1;
  p.terms_[m] = 1;
  return p;
}

Rational MultiPoly::coeff(const Mono& m) const {
  auto it = terms_.find(m);
  return it == terms_.end() ? Rational(0) : it->second;
}

void MultiPoly::set(const Mono& m, Rational c) {
  if (c == 0)
    terms_.erase(m);
  else
    terms_[m] = std::move(c);
}

void MultiPoly::add_term(const Mono& m, const Rational& c) {
  if (c == 0) return;
  auto [it, fresh] = terms_.try_emplace(m, c);
  if (!fresh) {
    it->second += c;
    if (it->second == 0) terms_.erase(it);
  }
}

MultiPoly MultiPoly::operator-() const {
  MultiPoly r(nvars_);
  for (auto& [m, c] : terms_) r.terms_[m] = -c;
  return r;
}

MultiPoly MultiPoly::operator+(const MultiPoly& o) const {
  MultiPoly r = *this;
  for (auto& [m, c] : o.terms_) r.add_term(m, c);
  return r;
}

MultiPoly MultiPoly::operator-(const MultiPoly& o) const {
  MultiPoly r = *this;
  for (auto& [m, c] : o.terms_) r.add_term(m, -c);
  return r;
}

MultiPoly MultiPoly::operator*(const MultiPoly& o) const {
  MultiPoly r(nvars_);
  Mono m(nvars_, 0);
  for (auto& [ma, ca] : terms_)
    for (auto& [mb, cb] : o.terms_) {
      for (int i = 0; i < nvars_; ++i) m[i] = ma[i] + mb[i];
      r.add_term(m, ca * cb);
    }
  return r;
}

MultiPoly MultiPoly::scaled(const Rational& c) const {
  MultiPoly r(nvars_);
  if (c == 0) return r;
  for (auto& [m, v] : terms_) r.terms_[m] = v * c;
  return r;
}

MultiPoly MultiPoly::pow(int n) const {
  if (n < 0) throw std::invalid_argument("MultiPoly::pow: negative exponent");
  MultiPoly r = constant(nvars_, 1);
  for (int k = 0; k < n; ++k) r = r * *this;
  return r;
}

bool MultiPoly::operator==(const MultiPoly& o) const {
  return nvars_ == o.nvars_ && terms_ == o.terms_;
}

MultiPoly MultiPoly::derivative(int i) const {
  MultiPoly r(nvars_);
  for (auto& [m, c] : terms_) {
    if (m[i] == 0) continue;
    Mono d = m;
    d[i] -= 1;
    r.add_term(d, c * m[i]);
  }
  return r;
}

MultiPoly MultiPoly::antiderivative(int i) const {
  MultiPoly r(nvars_);
  for (auto& [m, c] : terms_) {
    Mono d = m;
    d[i] += 1;
    r.add_term(d, c / d[i]);
  }
  return r;
}

MultiPoly MultiPoly::at_zero(int i) const {
  MultiPoly r(nvars_);
  for (auto& [m, c] : terms_)
    if (m[i] == 0) r.terms_[m] = c;
  return r;
}

int MultiPoly::degree_in(int i) const {
  int d = 0;
  for (auto& [m, c] : terms_) d = std::max(d, m[i]);
  return d;
}

double MultiPoly::eval(const std::vector<double>& x) const {
  double acc = 0;
  for (auto& [m, c] : terms_) {
    double t = to_double(c);
    for (int i = 0; i < nvars_; ++i)
      for (int k = 0; k < m[i]; ++k) t *= x[i];
    acc += t;
  }
  return acc;
}

Rational MultiPoly::eval_exact(const std::vector<Rational>& x) const {
  Rational acc = 0;
  for (auto& [m, c] : terms_) {
    Rational t = c;
    for (int i = 0; i < nvars_; ++i)
      for (int k = 0; k < m[i]; ++k) t *= x[i];
    acc += t;
  }
  return acc;
}

std::string MultiPoly::to_string(const std::vector<std::string>& names) const {
  if (terms_.empty()) return "0";
  std::ostringstream os;
  bool first = true;
  for (auto& [m, c] : terms_) {
    if (!first) os << " + ";
    first = false;
    os << rational_to_string(c);
    for (int i = 0; i < nvars_; ++i) {
      if (m[i] == 0) continue;
      os << '*' << names[i];
      if (m[i] > 1) os << '^' << m[i];
    }
  }
  return os.str();
}

// ---------------------------------------------------------------------------
// Expansion

namespace {

int symbol_index(const std::vector<std::string>& symbols, const std::string& name) {
  for (std::size_t i = 0; i < symbols.size(); ++i)
    if (symbols[i] == name) return static_cast<int>(i);
  return -1;
}

std::optional<MultiPoly> expand_p(const Expr& e, const std::vector<std::string>& symbols) {
  int n = static_cast<int>(symbols.size());
  switch (e->kind) {
    case ExprKind::Const:
      return MultiPoly::constant(n, e->value);
    case ExprKind::Param:
    case ExprKind::Var: {
      std::string name = e->kind == ExprKind::Param ? e->name : e->var.name();
      int i = symbol_index(symbols, name);
      if (i < 0) return std::nullopt;
      return MultiPoly::variable(n, i);
    }
    case ExprKind::Neg: {
      auto a = expand_p(e->a, symbols);
      if (!a) return std::nullopt;
      return -*a;
    }
    case ExprKind::Add: {
      auto a = expand_p(e->a, symbols), b = expand_p(e->b, symbols);
      if (!a || !b) return std::nullopt;
      return *a + *b;
    }
    case ExprKind::Sub: {
      auto a = expand_p(e->a, symbols), b = expand_p(e->b, symbols);
      if (!a || !b) return std::nullopt;
      return *a - *b;
    }
    case ExprKind::Mul: {
      auto a = expand_p(e->a, symbols), b = expand_p(e->b, symbols);
      if (!a || !b) return std::nullopt;
      return *a * *b;
    }
    case ExprKind::Div: {
      auto a = expand_p(e->a, symbols), b = expand_p(e->b, symbols);
      if (!a || !b) return std::nullopt;
      // only division by a nonzero constant stays polynomial
      if (b->terms().size() != 1) return std::nullopt;
      auto& [m, c] = *b->terms().begin();
      if (*std::max_element(m.begin(), m.end()) > 0) return std::nullopt;
      return a->scaled(Rational(1) / c);
    }
    case ExprKind::Pow: {
      if (e->exponent < 0) return std::nullopt;
      auto a = expand_p(e->a, symbols);
      if (!a) return std::nullopt;
      return a->pow(e->exponent);
    }
    case ExprKind::Sqrt:
    case ExprKind::Exp:
      return std::nullopt;
  }
  return std::nullopt;
}

std::optional<RationalForm> expand_r(const Expr& e, const std::vector<std::string>& symbols) {
  int n = static_cast<int>(symbols.size());
  auto lift = [&](MultiPoly p) {
    return RationalForm{std::move(p), MultiPoly::constant(n, 1)};
  };
  switch (e->kind) {
    case ExprKind::Const:
    case ExprKind::Param:
    case ExprKind::Var: {
      auto p = expand_p(e, symbols);
      if (!p) return std::nullopt;
      return lift(*p);
    }
    case ExprKind::Neg: {
      auto a = expand_r(e->a, symbols);
      if (!a) return std::nullopt;
      return RationalForm{-a->num, a->den};
    }
    case ExprKind::Add:
    case ExprKind::Sub: {
      auto a = expand_r(e->a, symbols), b = expand_r(e->b, symbols);
      if (!a || !b) return std::nullopt;
      MultiPoly num = e->kind == ExprKind::Add
                          ? a->num * b->den + b->num * a->den
                          : a->num * b->den - b->num * a->den;
      return RationalForm{std::move(num), a->den * b->den};
    }
    case ExprKind::Mul: {
      auto a = expand_r(e->a, symbols), b = expand_r(e->b, symbols);
      if (!a || !b) return std::nullopt;
      return RationalForm{a->num * b->num, a->den * b->den};
    }
    case ExprKind::Div: {
      auto a = expand_r(e->a, symbols), b = expand_r(e->b, symbols);
      if (!a || !b) return std::nullopt;
      if (b->num.is_zero()) return std::nullopt;
      return RationalForm{a->num * b->den, a->den * b->num};
    }
    case ExprKind::Pow: {
      auto a = expand_r(e->a, symbols);
      if (!a) return std::nullopt;
      int k = e->exponent;
      if (k >= 0) return RationalForm{a->num.pow(k), a->den.pow(k)};
      if (a->num.is_zero()) return std::nullopt;
      return RationalForm{a->den.pow(-k), a->num.pow(-k)};
    }
    case ExprKind::Sqrt:
    case ExprKind::Exp:
      return std::nullopt;
  }
  return std::nullopt;
}

}  // namespace

std::optional<MultiPoly> expand_polynomial(const Expr& e,
                                           const std::vector<std::string>& symbols) {
  return expand_p(e, symbols);
}

std::optional<RationalForm> expand_rational(const Expr& e,
                                            const std::vector<std::string>& symbols) {
  return expand_r(e, symbols);
}

bool rational_equal(const Expr& a, const Expr& b, const std::vector<std::string>& symbols) {
  auto ra = expand_rational(a, symbols), rb = expand_rational(b, symbols);
  if (!ra || !rb) return false;
  return ra->num * rb->den == rb->num * ra->den;
}

Expr poly_to_expr(const MultiPoly& p, const std::vector<std::string>& symbols) {
  auto symbol_expr = [&](int i) -> Expr {
    const std::string& s = symbols[i];
    // reuse the grammar's classification of coordinate vs parameter names
    Expr parsed = parse(s);
    return parsed;
  };
  Expr acc = constant(0);
  for (auto& [m, c] : p.terms()) {
    Expr t = constant(c);
    for (int i = 0; i < p.nvars(); ++i)
      if (m[i] > 0) t = mul(t, pow(symbol_expr(i), m[i]));
    acc = add(acc, t);
  }
  return acc;
}

}  // namespace gup
