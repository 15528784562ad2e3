#ifndef CPL_CHECK_HPP
#define CPL_CHECK_HPP

#include <set>
#include <string>

#include "cpl/ast.hpp"

namespace cpl {

// Result of static checking: the variable typing plus the structural facts
// the rest of the pipeline relies on.
struct TypeEnv {
  std::map<VarId, Type> types;
  std::vector<VarId> order;      // params first, then in definition order
  std::set<VarId> inputs;
  std::set<VarId> sampled;       // assigned by a probabilistic assignment
  std::set<VarId> carried;       // assigned inside some loop body
  std::set<VarId> defaultInit;   // carried vars with no definition before the loop

  Type typeOf(const VarId& v) const {
    auto it = types.find(v);
    if (it == types.end()) throw CplError("unknown variable " + v.str());
    return it->second;
  }
  bool has(const VarId& v) const { return types.count(v) > 0; }
};

// How strict the structural discipline is. Verification demands the
// single-top-level-loop form; the interpreter handles any loop shape.
enum class CheckMode { Verify, Interpret };

namespace detail {

class Checker {
 public:
  Checker(const Program& p, CheckMode mode) : p_(p), mode_(mode) {}

  TypeEnv run() {
    for (auto& [v, t] : p_.params) {
      if (env_.has(v)) throw CplError("duplicate parameter " + v.str());
      define(v, t);
      env_.inputs.insert(v);
    }
    std::set<VarId> defined;
    for (auto& [v, t] : p_.params) defined.insert(v);
    std::set<VarId> assigned;
    int loops = 0;
    for (size_t i = 0; i < p_.body.size(); ++i) {
      const Stmt& s = p_.body[i];
      if (s.kind == StmtKind::While) {
        ++loops;
        if (mode_ == CheckMode::Verify && loops > 1)
          throw CplError("only a single top-level loop is supported", s.loc);
      }
      checkStmt(s, defined, assigned, /*inLoop=*/false);
    }
    for (auto& r : p_.returns)
      if (!defined.count(r))
        throw CplError("return of undefined variable " + r.str());
    return env_;
  }

 private:
  void define(const VarId& v, Type t) {
    auto it = env_.types.find(v);
    if (it != env_.types.end()) {
      if (!it->second.compatible(t))
        throw CplError("type mismatch for " + v.str() + ": " + it->second.str() +
                       " vs " + t.str());
      // Re-definition across loop iterations may widen a finite range away.
      if (it->second.range != t.range) it->second.range = std::nullopt;
      return;
    }
    env_.types[v] = t;
    env_.order.push_back(v);
  }

  void checkStmt(const Stmt& s, std::set<VarId>& defined, std::set<VarId>& assigned,
                 bool inLoop) {
    switch (s.kind) {
      case StmtKind::Assign: {
        if (p_.isParam(s.target))
          throw CplError("SSA violation: input variable " + s.target.str() +
                             " is assigned",
                         s.loc);
        if (assigned.count(s.target))
          throw CplError("SSA violation: " + s.target.str() +
                             (inLoop ? " assigned twice in one iteration"
                                     : " assigned twice"),
                         s.loc);
        Type t = exprType(s.rhs, defined, s.loc);
        define(s.target, t);
        assigned.insert(s.target);
        defined.insert(s.target);
        break;
      }
      case StmtKind::Sample: {
        for (auto& a : s.dist.atoms) checkDistAtom(a, s.loc);
        for (size_t i = 0; i < s.sampleVars.size(); ++i) {
          const VarId& v = s.sampleVars[i];
          if (p_.isParam(v))
            throw CplError("SSA violation: input variable " + v.str() + " is sampled",
                           s.loc);
          if (assigned.count(v))
            throw CplError("SSA violation: " + v.str() +
                               (inLoop ? " assigned twice in one iteration"
                                       : " assigned twice"),
                           s.loc);
          define(v, s.dist.atoms[i].valueType());
          assigned.insert(v);
          defined.insert(v);
          env_.sampled.insert(v);
        }
        break;
      }
      case StmtKind::If: {
        if (exprType(s.cond, defined, s.loc).base != BaseType::Bool)
          throw CplError("condition must be boolean", s.loc);
        std::set<VarId> defT = defined, defE = defined;
        std::set<VarId> asgT = assigned, asgE = assigned;
        for (auto& t : *s.thenBranch) checkStmt(t, defT, asgT, inLoop);
        for (auto& t : *s.elseBranch) checkStmt(t, defE, asgE, inLoop);
        for (auto& st : *s.thenBranch)
          if (st.kind == StmtKind::While)
            throw CplError("loop nesting: loop under a conditional", st.loc);
        for (auto& st : *s.elseBranch)
          if (st.kind == StmtKind::While)
            throw CplError("loop nesting: loop under a conditional", st.loc);
        // Definite after the join: defined on both paths. Inside a loop body a
        // branch-local assignment still persists to the next iteration.
        for (auto& v : defT)
          if (defE.count(v)) defined.insert(v);
        for (auto& v : asgT) assigned.insert(v);
        for (auto& v : asgE) assigned.insert(v);
        break;
      }
      case StmtKind::While: {
        if (mode_ == CheckMode::Verify && inLoop)
          throw CplError("loop nesting: loops may not nest", s.loc);
        std::set<VarId> bodyVars;
        collectAssigned(*s.body, bodyVars);
        for (auto& v : bodyVars) {
          env_.carried.insert(v);
          if (!defined.count(v)) {
            // Carried variables without a pre-loop definition start at the
            // type default (false / 0) when the loop is entered.
            env_.defaultInit.insert(v);
          }
        }
        // Two passes: the first discovers body-var types so that guards and
        // reads of carried variables type-check on the second.
        for (int pass = 0; pass < 2; ++pass) {
          std::set<VarId> def = defined;
          for (auto& v : bodyVars)
            if (env_.has(v)) def.insert(v);
          std::set<VarId> asg;  // fresh per iteration
          try {
            for (auto& t : *s.body) checkStmt(t, def, asg, /*inLoop=*/true);
          } catch (const CplError&) {
            if (pass == 1) throw;
            continue;
          }
          if (pass == 1) {
            if (exprType(s.cond, def, s.loc).base != BaseType::Bool)
              throw CplError("loop guard must be boolean", s.loc);
          }
        }
        for (auto& v : bodyVars) defined.insert(v);
        break;
      }
    }
  }

  void collectAssigned(const StmtList& body, std::set<VarId>& out) {
    for (auto& s : body) {
      switch (s.kind) {
        case StmtKind::Assign: out.insert(s.target); break;
        case StmtKind::Sample:
          for (auto& v : s.sampleVars) out.insert(v);
          break;
        case StmtKind::If:
          collectAssigned(*s.thenBranch, out);
          collectAssigned(*s.elseBranch, out);
          break;
        case StmtKind::While: collectAssigned(*s.body, out); break;
      }
    }
  }

  void checkDistAtom(const DistAtom& a, SourceLoc loc) {
    if (a.kind == DistKind::Bern) {
      std::set<VarId> free;
      freeVars(a.param, free);
      for (auto& v : free)
        if (!p_.isParam(v))
          throw CplError("distribution mentions non-input variable " + v.str(), loc);
      std::set<VarId> inputs;
      for (auto& [v, t] : p_.params) inputs.insert(v);
      Type t = exprType(a.param, inputs, loc);
      if (t.base != BaseType::Real && t.base != BaseType::Int)
        throw CplError("bern parameter must be numeric", loc);
    }
  }

  void freeVars(const Expr& e, std::set<VarId>& out) {
    if (e->kind == ExprKind::Var) {
      out.insert(e->var);
      return;
    }
    for (auto& a : e->args) freeVars(a, out);
  }

  Type exprType(const Expr& e, const std::set<VarId>& defined, SourceLoc loc) {
    switch (e->kind) {
      case ExprKind::BoolLit: return Type::boolean();
      case ExprKind::IntLit: return Type::integer();
      case ExprKind::RatLit: return Type::real();
      case ExprKind::Var: {
        if (!defined.count(e->var))
          throw CplError("use before definition of " + e->var.str(),
                         e->loc.line ? e->loc : loc);
        return env_.typeOf(e->var);
      }
      case ExprKind::Not: {
        requireBase(e->args[0], BaseType::Bool, defined, loc);
        return Type::boolean();
      }
      case ExprKind::Neg: {
        Type t = exprType(e->args[0], defined, loc);
        if (t.base == BaseType::Bool) throw CplError("cannot negate a boolean", loc);
        return Type{t.base, std::nullopt};
      }
      case ExprKind::And:
      case ExprKind::Or: {
        requireBase(e->args[0], BaseType::Bool, defined, loc);
        requireBase(e->args[1], BaseType::Bool, defined, loc);
        return Type::boolean();
      }
      case ExprKind::Eq:
      case ExprKind::Ne: {
        Type a = exprType(e->args[0], defined, loc);
        Type b = exprType(e->args[1], defined, loc);
        if (!a.compatible(b))
          throw CplError("type mismatch in comparison: " + a.str() + " vs " + b.str(),
                         loc);
        return Type::boolean();
      }
      case ExprKind::Lt:
      case ExprKind::Le:
      case ExprKind::Gt:
      case ExprKind::Ge: {
        Type a = exprType(e->args[0], defined, loc);
        Type b = exprType(e->args[1], defined, loc);
        if (a.base == BaseType::Bool || !a.compatible(b))
          throw CplError("type mismatch in comparison: " + a.str() + " vs " + b.str(),
                         loc);
        return Type::boolean();
      }
      case ExprKind::Add:
      case ExprKind::Sub:
      case ExprKind::Mul: {
        Type a = exprType(e->args[0], defined, loc);
        Type b = exprType(e->args[1], defined, loc);
        if (a.base == BaseType::Bool || !a.compatible(b))
          throw CplError("type mismatch in arithmetic: " + a.str() + " vs " + b.str(),
                         loc);
        return Type{a.base, std::nullopt};
      }
      case ExprKind::Ite: {
        requireBase(e->args[0], BaseType::Bool, defined, loc);
        Type a = exprType(e->args[1], defined, loc);
        Type b = exprType(e->args[2], defined, loc);
        if (!a.compatible(b))
          throw CplError("ite branches disagree: " + a.str() + " vs " + b.str(), loc);
        return Type{a.base, std::nullopt};
      }
      case ExprKind::App: {
        auto it = p_.ufuns.find(e->fn);
        if (it == p_.ufuns.end()) throw CplError("unknown function " + e->fn, loc);
        if (it->second.argTypes.size() != e->args.size())
          throw CplError("arity mismatch calling " + e->fn, loc);
        for (size_t i = 0; i < e->args.size(); ++i) {
          Type a = exprType(e->args[i], defined, loc);
          if (!a.compatible(it->second.argTypes[i]))
            throw CplError("argument type mismatch calling " + e->fn, loc);
        }
        return it->second.retType;
      }
    }
    throw CplError("unreachable expression kind");
  }

  void requireBase(const Expr& e, BaseType b, const std::set<VarId>& defined,
                   SourceLoc loc) {
    if (exprType(e, defined, loc).base != b)
      throw CplError("expected " + Type{b, std::nullopt}.str() + " expression", loc);
  }

  const Program& p_;
  CheckMode mode_;
  TypeEnv env_;
};

}  // namespace detail

inline TypeEnv check(const Program& p, CheckMode mode = CheckMode::Verify) {
  return detail::Checker(p, mode).run();
}

// Type of an expression under an already-computed environment.
inline Type exprTypeIn(const Program& p, const TypeEnv& env, const Expr& e) {
  detail::Checker c(p, CheckMode::Interpret);
  (void)c;
  // Re-deriving through the checker would redo scoping; a small local walk
  // suffices since env already carries every variable's type.
  switch (e->kind) {
    case ExprKind::BoolLit: return Type::boolean();
    case ExprKind::IntLit: return Type::integer();
    case ExprKind::RatLit: return Type::real();
    case ExprKind::Var: return env.typeOf(e->var);
    case ExprKind::Not:
    case ExprKind::And:
    case ExprKind::Or:
    case ExprKind::Eq:
    case ExprKind::Ne:
    case ExprKind::Lt:
    case ExprKind::Le:
    case ExprKind::Gt:
    case ExprKind::Ge: return Type::boolean();
    case ExprKind::Neg: return exprTypeIn(p, env, e->args[0]);
    case ExprKind::Add:
    case ExprKind::Sub:
    case ExprKind::Mul: {
      Type t = exprTypeIn(p, env, e->args[0]);
      return Type{t.base, std::nullopt};
    }
    case ExprKind::Ite: {
      Type t = exprTypeIn(p, env, e->args[1]);
      return Type{t.base, std::nullopt};
    }
    case ExprKind::App: {
      auto it = p.ufuns.find(e->fn);
      if (it == p.ufuns.end()) throw CplError("unknown function " + e->fn);
      return it->second.retType;
    }
  }
  throw CplError("unreachable expression kind");
}

}  // namespace cpl

#endif
