#ifndef CPL_AST_HPP
#define CPL_AST_HPP

#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "cpl/rational.hpp"

namespace cpl {

struct SourceLoc {
  int line = 0;
  int col = 0;
};

class CplError : public std::runtime_error {
 public:
  CplError(std::string msg, SourceLoc loc = {})
      : std::runtime_error(loc.line > 0 ? "line " + std::to_string(loc.line) + ":" +
                                              std::to_string(loc.col) + ": " + msg
                                        : msg),
        loc(loc) {}
  SourceLoc loc;
};

// ---------------------------------------------------------------------------
// Types and variables
// ---------------------------------------------------------------------------

enum class BaseType { Bool, Int, Real };

struct Type {
  BaseType base = BaseType::Bool;
  // Present iff this is a finite integer range lo..hi (inclusive).
  std::optional<std::pair<long, long>> range;

  static Type boolean() { return {BaseType::Bool, std::nullopt}; }
  static Type integer() { return {BaseType::Int, std::nullopt}; }
  static Type real() { return {BaseType::Real, std::nullopt}; }
  static Type finiteRange(long lo, long hi) { return {BaseType::Int, {{lo, hi}}}; }

  bool isFinite() const { return base == BaseType::Bool || range.has_value(); }
  long domainSize() const {
    if (base == BaseType::Bool) return 2;
    if (range) return range->second - range->first + 1;
    throw CplError("domain is not finite");
  }
  bool operator==(const Type& o) const { return base == o.base && range == o.range; }
  bool operator!=(const Type& o) const { return !(*this == o); }
  // Two types agree as value carriers (a FiniteRange is an Int).
  bool compatible(const Type& o) const { return base == o.base; }

  std::string str() const {
    switch (base) {
      case BaseType::Bool: return "bool";
      case BaseType::Real: return "real";
      case BaseType::Int:
        if (range)
          return "int[" + std::to_string(range->first) + ".." +
                 std::to_string(range->second) + "]";
        return "int";
    }
    return "?";
  }
};

// A program variable. `tag` distinguishes the copies introduced by
// self-composition (0 = the untagged original, 1..4 = tagged copies).
struct VarId {
  std::string base;
  int tag = 0;

  VarId() = default;
  VarId(std::string b, int t = 0) : base(std::move(b)), tag(t) {}

  bool operator==(const VarId& o) const { return tag == o.tag && base == o.base; }
  bool operator!=(const VarId& o) const { return !(*this == o); }
  bool operator<(const VarId& o) const {
    return base != o.base ? base < o.base : tag < o.tag;
  }

  // '@' cannot occur in source identifiers, so tagged names never collide
  // with user names.
  std::string str() const { return tag == 0 ? base : base + "@" + std::to_string(tag); }
};

// ---------------------------------------------------------------------------
// Expressions
// ---------------------------------------------------------------------------

enum class ExprKind {
  BoolLit, IntLit, RatLit, Var,
  Not, Neg,
  And, Or, Eq, Ne, Lt, Le, Gt, Ge, Add, Sub, Mul,
  Ite,
  App,  // uninterpreted function application
};

struct ExprNode;
using Expr = std::shared_ptr<const ExprNode>;

struct ExprNode {
  ExprKind kind;
  bool boolVal = false;
  long intVal = 0;
  Rat ratVal;
  VarId var;
  std::string fn;  // for App
  std::vector<Expr> args;
  SourceLoc loc;
};

inline Expr mkExpr(ExprKind k, std::vector<Expr> args = {}, SourceLoc loc = {}) {
  auto n = std::make_shared<ExprNode>();
  n->kind = k;
  n->args = std::move(args);
  n->loc = loc;
  return n;
}
inline Expr boolLit(bool b, SourceLoc loc = {}) {
  auto n = std::make_shared<ExprNode>();
  n->kind = ExprKind::BoolLit;
  n->boolVal = b;
  n->loc = loc;
  return n;
}
inline Expr intLit(long v, SourceLoc loc = {}) {
  auto n = std::make_shared<ExprNode>();
  n->kind = ExprKind::IntLit;
  n->intVal = v;
  n->loc = loc;
  return n;
}
inline Expr ratLit(const Rat& v, SourceLoc loc = {}) {
  auto n = std::make_shared<ExprNode>();
  n->kind = ExprKind::RatLit;
  n->ratVal = v;
  n->loc = loc;
  return n;
}
inline Expr varRef(VarId v, SourceLoc loc = {}) {
  auto n = std::make_shared<ExprNode>();
  n->kind = ExprKind::Var;
  n->var = std::move(v);
  n->loc = loc;
  return n;
}
inline Expr appExpr(std::string fn, std::vector<Expr> args, SourceLoc loc = {}) {
  auto n = std::make_shared<ExprNode>();
  n->kind = ExprKind::App;
  n->fn = std::move(fn);
  n->args = std::move(args);
  n->loc = loc;
  return n;
}

inline bool exprEq(const Expr& a, const Expr& b) {
  if (a == b) return true;
  if (!a || !b || a->kind != b->kind) return false;
  switch (a->kind) {
    case ExprKind::BoolLit: return a->boolVal == b->boolVal;
    case ExprKind::IntLit: return a->intVal == b->intVal;
    case ExprKind::RatLit: return a->ratVal == b->ratVal;
    case ExprKind::Var: return a->var == b->var;
    default: break;
  }
  if (a->fn != b->fn || a->args.size() != b->args.size()) return false;
  for (size_t i = 0; i < a->args.size(); ++i)
    if (!exprEq(a->args[i], b->args[i])) return false;
  return true;
}

// ---------------------------------------------------------------------------
// Distribution expressions
// ---------------------------------------------------------------------------

enum class DistKind { Bern, UniformInt, Opaque };

struct DistAtom {
  DistKind kind;
  Expr param;             // Bern probability (expression over inputs)
  long lo = 0, hi = 0;    // UniformInt bounds
  std::string name;       // Opaque distribution name
  Type opaqueType;        // Opaque result type

  Type valueType() const {
    switch (kind) {
      case DistKind::Bern: return Type::boolean();
      case DistKind::UniformInt: return Type::finiteRange(lo, hi);
      case DistKind::Opaque: return opaqueType;
    }
    return Type::boolean();
  }
};

// A product of atoms; a single sample is a product of arity 1. The product
// arity always equals the sampled variable-vector arity.
struct DistExpr {
  std::vector<DistAtom> atoms;
  size_t arity() const { return atoms.size(); }
};

inline bool distAtomEq(const DistAtom& a, const DistAtom& b) {
  if (a.kind != b.kind) return false;
  switch (a.kind) {
    case DistKind::Bern: return exprEq(a.param, b.param);
    case DistKind::UniformInt: return a.lo == b.lo && a.hi == b.hi;
    case DistKind::Opaque: return a.name == b.name;
  }
  return false;
}

// ---------------------------------------------------------------------------
// Statements and programs
// ---------------------------------------------------------------------------

enum class StmtKind { Assign, Sample, If, While };

struct Stmt;
using StmtList = std::vector<Stmt>;

// Present on whiles produced by `for` desugaring: guard is `counter <= bound`
// and the body ends with `counter <- counter + 1`.
struct CounterInfo {
  VarId counter;
  Expr bound;
};

struct Stmt {
  StmtKind kind = StmtKind::Assign;
  // Assign
  VarId target;
  Expr rhs;
  // Sample
  std::vector<VarId> sampleVars;
  DistExpr dist;
  // If / While
  Expr cond;
  std::shared_ptr<StmtList> thenBranch;
  std::shared_ptr<StmtList> elseBranch;
  std::shared_ptr<StmtList> body;
  std::optional<CounterInfo> counter;
  SourceLoc loc;
};

inline Stmt mkAssign(VarId v, Expr e, SourceLoc loc = {}) {
  Stmt s;
  s.kind = StmtKind::Assign;
  s.target = std::move(v);
  s.rhs = std::move(e);
  s.loc = loc;
  return s;
}
inline Stmt mkSample(std::vector<VarId> vs, DistExpr d, SourceLoc loc = {}) {
  Stmt s;
  s.kind = StmtKind::Sample;
  s.sampleVars = std::move(vs);
  s.dist = std::move(d);
  s.loc = loc;
  return s;
}
inline Stmt mkIf(Expr c, StmtList t, StmtList e, SourceLoc loc = {}) {
  Stmt s;
  s.kind = StmtKind::If;
  s.cond = std::move(c);
  s.thenBranch = std::make_shared<StmtList>(std::move(t));
  s.elseBranch = std::make_shared<StmtList>(std::move(e));
  s.loc = loc;
  return s;
}
inline Stmt mkWhile(Expr c, StmtList b, std::optional<CounterInfo> ctr = std::nullopt,
                    SourceLoc loc = {}) {
  Stmt s;
  s.kind = StmtKind::While;
  s.cond = std::move(c);
  s.body = std::make_shared<StmtList>(std::move(b));
  s.counter = std::move(ctr);
  s.loc = loc;
  return s;
}

struct UFunDecl {
  std::vector<Type> argTypes;
  Type retType;
};

struct Program {
  std::vector<std::pair<VarId, Type>> params;
  std::map<std::string, Type> opaqueDists;   // declared unknown distributions
  std::map<std::string, UFunDecl> ufuns;     // declared uninterpreted operations
  StmtList body;
  std::vector<VarId> returns;

  bool isParam(const VarId& v) const {
    for (auto& [p, t] : params)
      if (p == v) return true;
    return false;
  }
  std::optional<Type> paramType(const VarId& v) const {
    for (auto& [p, t] : params)
      if (p == v) return t;
    return std::nullopt;
  }
};

inline bool stmtEq(const Stmt& a, const Stmt& b);

inline bool stmtListEq(const StmtList& a, const StmtList& b) {
  if (a.size() != b.size()) return false;
  for (size_t i = 0; i < a.size(); ++i)
    if (!stmtEq(a[i], b[i])) return false;
  return true;
}

inline bool stmtEq(const Stmt& a, const Stmt& b) {
  if (a.kind != b.kind) return false;
  switch (a.kind) {
    case StmtKind::Assign:
      return a.target == b.target && exprEq(a.rhs, b.rhs);
    case StmtKind::Sample: {
      if (a.sampleVars != b.sampleVars) return false;
      if (a.dist.arity() != b.dist.arity()) return false;
      for (size_t i = 0; i < a.dist.atoms.size(); ++i)
        if (!distAtomEq(a.dist.atoms[i], b.dist.atoms[i])) return false;
      return true;
    }
    case StmtKind::If:
      return exprEq(a.cond, b.cond) && stmtListEq(*a.thenBranch, *b.thenBranch) &&
             stmtListEq(*a.elseBranch, *b.elseBranch);
    case StmtKind::While:
      return exprEq(a.cond, b.cond) && stmtListEq(*a.body, *b.body);
  }
  return false;
}

inline bool programEq(const Program& a, const Program& b) {
  return a.params == b.params && stmtListEq(a.body, b.body) && a.returns == b.returns;
}

// ---------------------------------------------------------------------------
// Pretty printer (parse . pretty == identity on ASTs)
// ---------------------------------------------------------------------------

namespace detail {

inline int precOf(ExprKind k) {
  switch (k) {
    case ExprKind::Or: return 1;
    case ExprKind::And: return 2;
    case ExprKind::Eq: case ExprKind::Ne: case ExprKind::Lt:
    case ExprKind::Le: case ExprKind::Gt: case ExprKind::Ge: return 3;
    case ExprKind::Add: case ExprKind::Sub: return 4;
    case ExprKind::Mul: return 5;
    case ExprKind::Not: case ExprKind::Neg: return 6;
    default: return 7;
  }
}

inline const char* opToken(ExprKind k) {
  switch (k) {
    case ExprKind::Or: return "||";
    case ExprKind::And: return "&&";
    case ExprKind::Eq: return "=";
    case ExprKind::Ne: return "!=";
    case ExprKind::Lt: return "<";
    case ExprKind::Le: return "<=";
    case ExprKind::Gt: return ">";
    case ExprKind::Ge: return ">=";
    case ExprKind::Add: return "+";
    case ExprKind::Sub: return "-";
    case ExprKind::Mul: return "*";
    default: return "?";
  }
}

}  // namespace detail

inline std::string exprStr(const Expr& e) {
  using detail::precOf;
  switch (e->kind) {
    case ExprKind::BoolLit: return e->boolVal ? "true" : "false";
    case ExprKind::IntLit: return std::to_string(e->intVal);
    case ExprKind::RatLit: return ratStr(e->ratVal);
    case ExprKind::Var: return e->var.str();
    case ExprKind::Not: {
      std::string a = exprStr(e->args[0]);
      if (precOf(e->args[0]->kind) < precOf(ExprKind::Not)) a = "(" + a + ")";
      return "!" + a;
    }
    case ExprKind::Neg: {
      std::string a = exprStr(e->args[0]);
      if (precOf(e->args[0]->kind) < precOf(ExprKind::Neg)) a = "(" + a + ")";
      return "-" + a;
    }
    case ExprKind::Ite:
      return "ite(" + exprStr(e->args[0]) + ", " + exprStr(e->args[1]) + ", " +
             exprStr(e->args[2]) + ")";
    case ExprKind::App: {
      std::string out = e->fn + "(";
      for (size_t i = 0; i < e->args.size(); ++i)
        out += (i ? ", " : "") + exprStr(e->args[i]);
      return out + ")";
    }
    default: break;
  }
  int p = precOf(e->kind);
  auto side = [&](const Expr& a, bool right) {
    std::string s = exprStr(a);
    int ap = precOf(a->kind);
    // Binary ops associate left; parenthesize right child at equal precedence.
    if (ap < p || (right && ap == p)) s = "(" + s + ")";
    return s;
  };
  return side(e->args[0], false) + " " + detail::opToken(e->kind) + " " +
         side(e->args[1], true);
}

inline std::string distAtomStr(const DistAtom& a) {
  switch (a.kind) {
    case DistKind::Bern: return "bern(" + exprStr(a.param) + ")";
    case DistKind::UniformInt:
      return "uniformInt(" + std::to_string(a.lo) + ", " + std::to_string(a.hi) + ")";
    case DistKind::Opaque: return a.name;
  }
  return "?";
}

inline std::string distStr(const DistExpr& d) {
  std::string out;
  for (size_t i = 0; i < d.atoms.size(); ++i)
    out += (i ? " * " : "") + distAtomStr(d.atoms[i]);
  return out;
}

inline void prettyStmts(const StmtList& body, std::ostringstream& os, int indent);

inline void prettyStmt(const Stmt& s, std::ostringstream& os, int indent) {
  std::string pad(2 * indent, ' ');
  switch (s.kind) {
    case StmtKind::Assign:
      os << pad << s.target.str() << " <- " << exprStr(s.rhs) << "\n";
      break;
    case StmtKind::Sample: {
      os << pad;
      if (s.sampleVars.size() == 1) {
        os << s.sampleVars[0].str();
      } else {
        os << "(";
        for (size_t i = 0; i < s.sampleVars.size(); ++i)
          os << (i ? ", " : "") << s.sampleVars[i].str();
        os << ")";
      }
      os << " ~ " << distStr(s.dist) << "\n";
      break;
    }
    case StmtKind::If:
      os << pad << "if " << exprStr(s.cond) << " {\n";
      prettyStmts(*s.thenBranch, os, indent + 1);
      if (!s.elseBranch->empty()) {
        os << pad << "} else {\n";
        prettyStmts(*s.elseBranch, os, indent + 1);
      }
      os << pad << "}\n";
      break;
    case StmtKind::While:
      os << pad << "while " << exprStr(s.cond) << " {\n";
      prettyStmts(*s.body, os, indent + 1);
      os << pad << "}\n";
      break;
  }
}

inline void prettyStmts(const StmtList& body, std::ostringstream& os, int indent) {
  for (auto& s : body) prettyStmt(s, os, indent);
}

inline std::string pretty(const Program& p) {
  std::ostringstream os;
  for (auto& [v, t] : p.params) os << "param " << v.str() << ": " << t.str() << "\n";
  for (auto& [n, t] : p.opaqueDists) os << "dist " << n << ": " << t.str() << "\n";
  for (auto& [n, d] : p.ufuns) {
    os << "ufun " << n << "(";
    for (size_t i = 0; i < d.argTypes.size(); ++i)
      os << (i ? ", " : "") << d.argTypes[i].str();
    os << "): " << d.retType.str() << "\n";
  }
  prettyStmts(p.body, os, 0);
  if (!p.returns.empty()) {
    os << "return (";
    for (size_t i = 0; i < p.returns.size(); ++i)
      os << (i ? ", " : "") << p.returns[i].str();
    os << ")\n";
  }
  return os.str();
}

}  // namespace cpl

#endif
