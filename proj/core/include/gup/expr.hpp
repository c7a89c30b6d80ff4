#pragma once

#include "gup/rational.hpp"

#include <map>
#include <memory>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace gup {

// Small symbolic expression layer over phase-space coordinates q1..qd,
// p1..pd, named parameters and exact rational constants.
//
// Grammar (EBNF), binding tightest to loosest: ^  unary-  * /  + -
//
//   expr    = term { ("+" | "-") term } ;
//   term    = unary { ("*" | "/") unary } ;
//   unary   = "-" unary | power ;
//   power   = primary [ "^" [ "-" ] digits ] ;
//   primary = number | ident | ident "(" expr ")" | "(" expr ")" ;
//   number  = digits [ "." digits ] ;
//   ident   = lowercase { lowercase | digit } ;
//
// Exponents are integer literals only. q<i> and p<i> (i >= 1) are reserved
// coordinate names; every other identifier is a parameter. The recognized
// functions are sqrt and exp. Decimal literals become exact rationals.

struct PhasePoint {
  std::vector<double> q;
  std::vector<double> p;
  std::map<std::string, double> params;

  int dim() const { return static_cast<int>(q.size()); }
};

enum class VarKind { Q, P };

struct VarRef {
  VarKind kind = VarKind::Q;
  int index = 1;  // 1-based

  std::string name() const;
  bool operator==(const VarRef&) const = default;
  bool operator<(const VarRef& o) const {
    return kind != o.kind ? kind < o.kind : index < o.index;
  }
};

enum class ExprKind { Const, Param, Var, Neg, Sqrt, Exp, Add, Sub, Mul, Div, Pow };

class ExprNode;
using Expr = std::shared_ptr<const ExprNode>;

class ExprNode {
 public:
  ExprKind kind;
  Rational value;       // Const
  std::string name;     // Param
  VarRef var;           // Var
  Expr a, b;            // children; b empty for unary nodes
  int exponent = 0;     // Pow

  explicit ExprNode(ExprKind k) : kind(k) {}
};

struct ParseError : std::runtime_error {
  ParseError(const std::string& what, std::size_t offset);
  std::size_t offset;  // byte offset into the input
};

struct EvalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Construction. The binary/unary builders apply cheap value-preserving
// identities (0+x, 1*x, constant folding), so mechanically produced trees
// such as derivatives stay readable.
Expr constant(Rational v);
Expr constant(long long v);
Expr param(std::string name);
Expr var(VarRef v);
Expr qvar(int i);
Expr pvar(int i);
Expr neg(Expr e);
Expr sqrt(Expr e);
Expr exp(Expr e);
Expr add(Expr a, Expr b);
Expr sub(Expr a, Expr b);
Expr mul(Expr a, Expr b);
Expr div(Expr a, Expr b);
Expr pow(Expr base, int exponent);

Expr parse(const std::string& text);  // throws ParseError
std::string to_string(const Expr& e);

// Numeric evaluation against a phase point. Unknown parameters, coordinate
// indices beyond the point's dimension, sqrt of a negative value and division
// by zero all throw EvalError naming the offending subexpression.
double eval(const Expr& e, const PhasePoint& x);

// Exact partial derivatives.
Expr diff(const Expr& e, VarRef v);
Expr diff_param(const Expr& e, const std::string& name);

// Simultaneous substitution. Keys are surface names: "q1", "p2", "beta".
// Nodes not touched by any binding are shared with the input tree unchanged.
Expr substitute(const Expr& e, const std::map<std::string, Expr>& bindings);

// Conservative, value-preserving cleanup: constant folding, 0/1 identities,
// flattening of +/* chains. Never reorders or cancels symbolic terms.
Expr simplify(const Expr& e);

bool structural_equal(const Expr& a, const Expr& b);

struct SymbolSet {
  std::set<std::string> params;
  std::set<VarRef> vars;
};
SymbolSet collect_symbols(const Expr& e);

}  // namespace gup
