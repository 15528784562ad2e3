#ifndef CPL_SEMANTICS_HPP
#define CPL_SEMANTICS_HPP

#include <algorithm>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "cpl/ast.hpp"
#include "cpl/check.hpp"

// Exact-inference interpreter: the output distribution of a program is
// computed as a finite map from states to exact rational masses. Loops are
// unrolled with the still-looping mass tracked as a residual, so every
// verdict the synthesizer is later checked against is an exact statement.

namespace cpl {

// ---------------------------------------------------------------------------
// Values and states
// ---------------------------------------------------------------------------

struct Value {
  BaseType kind = BaseType::Bool;
  bool b = false;
  long i = 0;
  Rat r;

  static Value boolean(bool v) {
    Value x;
    x.kind = BaseType::Bool;
    x.b = v;
    return x;
  }
  static Value integer(long v) {
    Value x;
    x.kind = BaseType::Int;
    x.i = v;
    return x;
  }
  static Value rational(Rat v) {
    Value x;
    x.kind = BaseType::Real;
    x.r = std::move(v);
    return x;
  }
  static Value defaultOf(const Type& t) {
    switch (t.base) {
      case BaseType::Bool: return boolean(false);
      case BaseType::Int: return integer(t.range ? t.range->first : 0);
      case BaseType::Real: return rational(Rat(0));
    }
    return boolean(false);
  }

  Rat asRat() const {
    switch (kind) {
      case BaseType::Real: return r;
      case BaseType::Int: return Rat(i);
      case BaseType::Bool: throw CplError("boolean used as number");
    }
    return Rat(0);
  }

  bool operator==(const Value& o) const {
    if (kind != o.kind) return false;
    switch (kind) {
      case BaseType::Bool: return b == o.b;
      case BaseType::Int: return i == o.i;
      case BaseType::Real: return r == o.r;
    }
    return false;
  }
  bool operator!=(const Value& o) const { return !(*this == o); }
  bool operator<(const Value& o) const {
    if (kind != o.kind) return kind < o.kind;
    switch (kind) {
      case BaseType::Bool: return b < o.b;
      case BaseType::Int: return i < o.i;
      case BaseType::Real: return r < o.r;
    }
    return false;
  }

  std::string str() const {
    switch (kind) {
      case BaseType::Bool: return b ? "true" : "false";
      case BaseType::Int: return std::to_string(i);
      case BaseType::Real: return ratStr(r);
    }
    return "?";
  }
};

using Tuple = std::vector<Value>;

inline std::string tupleStr(const Tuple& t) {
  std::string out = "(";
  for (size_t i = 0; i < t.size(); ++i) out += (i ? ", " : "") + t[i].str();
  return out + ")";
}

// A state is a value vector indexed through a shared variable order.
struct StateSpace {
  std::vector<VarId> vars;
  std::map<VarId, size_t> index;

  explicit StateSpace(std::vector<VarId> vs) : vars(std::move(vs)) {
    for (size_t i = 0; i < vars.size(); ++i) index[vars[i]] = i;
  }
  size_t indexOf(const VarId& v) const {
    auto it = index.find(v);
    if (it == index.end()) throw CplError("variable not in state space: " + v.str());
    return it->second;
  }
};

using State = Tuple;

// ---------------------------------------------------------------------------
// Concrete bindings for opaque distributions and uninterpreted operations
// ---------------------------------------------------------------------------

struct OracleBindings {
  std::map<std::string, DistExpr> dists;
  // Builtin boolean tables keyed by name: and, or, xor, nand, nor, eq,
  // implies, first, second, not, id.
  std::map<std::string, std::string> funs;

  static Value applyFun(const std::string& table, const std::vector<Value>& args) {
    auto need = [&](size_t n) {
      if (args.size() != n)
        throw CplError("builtin '" + table + "' expects " + std::to_string(n) +
                       " arguments");
    };
    auto B = [&](size_t k) {
      if (args[k].kind != BaseType::Bool) throw CplError("builtin argument not boolean");
      return args[k].b;
    };
    if (table == "and") { need(2); return Value::boolean(B(0) && B(1)); }
    if (table == "or") { need(2); return Value::boolean(B(0) || B(1)); }
    if (table == "xor") { need(2); return Value::boolean(B(0) != B(1)); }
    if (table == "nand") { need(2); return Value::boolean(!(B(0) && B(1))); }
    if (table == "nor") { need(2); return Value::boolean(!(B(0) || B(1))); }
    if (table == "eq") { need(2); return Value::boolean(B(0) == B(1)); }
    if (table == "implies") { need(2); return Value::boolean(!B(0) || B(1)); }
    if (table == "first") { need(2); return Value::boolean(B(0)); }
    if (table == "second") { need(2); return Value::boolean(B(1)); }
    if (table == "not") { need(1); return Value::boolean(!B(0)); }
    if (table == "id") { need(1); return Value::boolean(B(0)); }
    throw CplError("unknown builtin function table '" + table + "'");
  }
};

// ---------------------------------------------------------------------------
// Expression evaluation
// ---------------------------------------------------------------------------

inline Value evalExpr(const Expr& e, const std::function<Value(const VarId&)>& lookup,
                      const OracleBindings* bind = nullptr) {
  auto rec = [&](const Expr& a) { return evalExpr(a, lookup, bind); };
  switch (e->kind) {
    case ExprKind::BoolLit: return Value::boolean(e->boolVal);
    case ExprKind::IntLit: return Value::integer(e->intVal);
    case ExprKind::RatLit: return Value::rational(e->ratVal);
    case ExprKind::Var: return lookup(e->var);
    case ExprKind::Not: return Value::boolean(!rec(e->args[0]).b);
    case ExprKind::Neg: {
      Value v = rec(e->args[0]);
      if (v.kind == BaseType::Int) return Value::integer(-v.i);
      return Value::rational(-v.r);
    }
    case ExprKind::And: return Value::boolean(rec(e->args[0]).b && rec(e->args[1]).b);
    case ExprKind::Or: return Value::boolean(rec(e->args[0]).b || rec(e->args[1]).b);
    case ExprKind::Eq: return Value::boolean(rec(e->args[0]) == rec(e->args[1]));
    case ExprKind::Ne: return Value::boolean(rec(e->args[0]) != rec(e->args[1]));
    case ExprKind::Lt: return Value::boolean(rec(e->args[0]).asRat() < rec(e->args[1]).asRat());
    case ExprKind::Le: return Value::boolean(rec(e->args[0]).asRat() <= rec(e->args[1]).asRat());
    case ExprKind::Gt: return Value::boolean(rec(e->args[0]).asRat() > rec(e->args[1]).asRat());
    case ExprKind::Ge: return Value::boolean(rec(e->args[0]).asRat() >= rec(e->args[1]).asRat());
    case ExprKind::Add: {
      Value a = rec(e->args[0]), b = rec(e->args[1]);
      if (a.kind == BaseType::Int && b.kind == BaseType::Int)
        return Value::integer(a.i + b.i);
      return Value::rational(a.asRat() + b.asRat());
    }
    case ExprKind::Sub: {
      Value a = rec(e->args[0]), b = rec(e->args[1]);
      if (a.kind == BaseType::Int && b.kind == BaseType::Int)
        return Value::integer(a.i - b.i);
      return Value::rational(a.asRat() - b.asRat());
    }
    case ExprKind::Mul: {
      Value a = rec(e->args[0]), b = rec(e->args[1]);
      if (a.kind == BaseType::Int && b.kind == BaseType::Int)
        return Value::integer(a.i * b.i);
      return Value::rational(a.asRat() * b.asRat());
    }
    case ExprKind::Ite:
      return rec(e->args[0]).b ? rec(e->args[1]) : rec(e->args[2]);
    case ExprKind::App: {
      if (!bind || !bind->funs.count(e->fn))
        throw CplError("uninterpreted operation '" + e->fn +
                       "' has no concrete binding");
      std::vector<Value> args;
      for (auto& a : e->args) args.push_back(rec(a));
      return OracleBindings::applyFun(bind->funs.at(e->fn), args);
    }
  }
  throw CplError("unreachable expression kind");
}

// ---------------------------------------------------------------------------
// Distributions
// ---------------------------------------------------------------------------

// Distribution over value tuples; masses are positive and sum to one.
struct TupleDist {
  std::map<Tuple, Rat> pmf;
};

// eval_dist: the exact pmf of a distribution expression in a given state.
inline TupleDist evalDist(const DistExpr& d,
                          const std::function<Value(const VarId&)>& lookup,
                          const OracleBindings* bind = nullptr) {
  std::vector<std::vector<std::pair<Value, Rat>>> components;
  for (auto& atom : d.atoms) {
    std::vector<std::pair<Value, Rat>> comp;
    switch (atom.kind) {
      case DistKind::Bern: {
        Rat p = evalExpr(atom.param, lookup, bind).asRat();
        if (p < 0 || p > 1)
          throw CplError("bern parameter " + ratStr(p) + " outside [0,1]");
        if (p > 0) comp.push_back({Value::boolean(true), p});
        if (p < 1) comp.push_back({Value::boolean(false), Rat(1) - p});
        break;
      }
      case DistKind::UniformInt: {
        Rat w(1, atom.hi - atom.lo + 1);
        for (long v = atom.lo; v <= atom.hi; ++v)
          comp.push_back({Value::integer(v), w});
        break;
      }
      case DistKind::Opaque: {
        if (!bind || !bind->dists.count(atom.name))
          throw CplError("opaque distribution '" + atom.name +
                         "' has no concrete binding");
        const DistExpr& sub = bind->dists.at(atom.name);
        if (sub.arity() != 1) throw CplError("opaque binding must be scalar");
        TupleDist sd = evalDist(sub, lookup, nullptr);
        for (auto& [t, m] : sd.pmf) comp.push_back({t[0], m});
        break;
      }
    }
    components.push_back(std::move(comp));
  }
  TupleDist out;
  Tuple cur;
  std::function<void(size_t, const Rat&)> expand = [&](size_t k, const Rat& mass) {
    if (k == components.size()) {
      out.pmf[cur] += mass;
      return;
    }
    for (auto& [v, m] : components[k]) {
      cur.push_back(v);
      expand(k + 1, mass * m);
      cur.pop_back();
    }
  };
  expand(0, Rat(1));
  return out;
}

// Distribution over program states, with untracked in-loop mass.
struct ResidualDist {
  std::shared_ptr<StateSpace> space;
  std::map<State, Rat> pmf;
  Rat residual;  // mass still inside the loop at the unrolling cutoff

  Rat mass() const {
    Rat m = residual;
    for (auto& [s, p] : pmf) m += p;
    return m;
  }
  Rat probOf(const std::function<bool(const State&)>& pred) const {
    Rat m(0);
    for (auto& [s, p] : pmf)
      if (pred(s)) m += p;
    return m;
  }
};

struct UnrollPolicy {
  size_t maxIters = 512;
  Rat residualTarget = Rat(1, 1000000000);
  // When set, exceeding this residual after maxIters is an error.
  std::optional<Rat> hardCeiling = Rat(1, 1000000000);
};

// ---------------------------------------------------------------------------
// The interpreter
// ---------------------------------------------------------------------------

namespace detail {

class Interpreter {
 public:
  Interpreter(const Program& p, const TypeEnv& env, const OracleBindings* bind)
      : p_(p), env_(env), bind_(bind),
        space_(std::make_shared<StateSpace>(env.order)) {}

  ResidualDist run(const std::map<VarId, Value>& inputs, const UnrollPolicy& policy) {
    State init;
    for (auto& v : space_->vars) {
      auto it = inputs.find(v);
      if (it != inputs.end()) {
        init.push_back(it->second);
      } else if (env_.inputs.count(v)) {
        throw CplError("missing input value for " + v.str());
      } else {
        init.push_back(Value::defaultOf(env_.typeOf(v)));
      }
    }
    std::map<State, Rat> dist{{init, Rat(1)}};
    Rat residual(0);
    execList(p_.body, dist, residual, policy);
    ResidualDist out;
    out.space = space_;
    out.pmf = std::move(dist);
    out.residual = residual;
    return out;
  }

 private:
  Value lookupIn(const State& s, const VarId& v) const {
    return s[space_->indexOf(v)];
  }

  void execList(const StmtList& body, std::map<State, Rat>& dist, Rat& residual,
                const UnrollPolicy& policy) {
    for (auto& s : body) execStmt(s, dist, residual, policy);
  }

  void execStmt(const Stmt& st, std::map<State, Rat>& dist, Rat& residual,
                const UnrollPolicy& policy) {
    switch (st.kind) {
      case StmtKind::Assign: {
        std::map<State, Rat> next;
        size_t idx = space_->indexOf(st.target);
        for (auto& [s, m] : dist) {
          State t = s;
          t[idx] = evalExpr(st.rhs, [&](const VarId& v) { return lookupIn(s, v); },
                            bind_);
          next[t] += m;
        }
        dist = std::move(next);
        break;
      }
      case StmtKind::Sample: {
        std::map<State, Rat> next;
        std::vector<size_t> idx;
        for (auto& v : st.sampleVars) idx.push_back(space_->indexOf(v));
        for (auto& [s, m] : dist) {
          TupleDist td = evalDist(
              st.dist, [&](const VarId& v) { return lookupIn(s, v); }, bind_);
          for (auto& [tuple, tm] : td.pmf) {
            State t = s;
            for (size_t k = 0; k < idx.size(); ++k) t[idx[k]] = tuple[k];
            next[t] += m * tm;
          }
        }
        dist = std::move(next);
        break;
      }
      case StmtKind::If: {
        std::map<State, Rat> thenD, elseD;
        for (auto& [s, m] : dist) {
          bool c = evalExpr(st.cond, [&](const VarId& v) { return lookupIn(s, v); },
                            bind_)
                       .b;
          (c ? thenD : elseD)[s] += m;
        }
        execList(*st.thenBranch, thenD, residual, policy);
        execList(*st.elseBranch, elseD, residual, policy);
        dist = std::move(thenD);
        for (auto& [s, m] : elseD) dist[s] += m;
        break;
      }
      case StmtKind::While: {
        std::map<State, Rat> done, active;
        auto split = [&](std::map<State, Rat>& src) {
          for (auto& [s, m] : src) {
            bool c = evalExpr(st.cond,
                              [&](const VarId& v) { return lookupIn(s, v); }, bind_)
                         .b;
            (c ? active : done)[s] += m;
          }
          src.clear();
        };
        split(dist);
        size_t iters = 0;
        auto activeMass = [&]() {
          Rat m(0);
          for (auto& [s, p] : active) m += p;
          return m;
        };
        while (!active.empty() && activeMass() > policy.residualTarget &&
               iters < policy.maxIters) {
          execList(*st.body, active, residual, policy);
          std::map<State, Rat> stillActive;
          for (auto& [s, m] : active) {
            bool c = evalExpr(st.cond,
                              [&](const VarId& v) { return lookupIn(s, v); }, bind_)
                         .b;
            if (c)
              stillActive[s] += m;
            else
              done[s] += m;
          }
          active = std::move(stillActive);
          ++iters;
        }
        Rat rem = activeMass();
        if (rem > 0) {
          if (policy.hardCeiling && rem > *policy.hardCeiling)
            throw CplError("unroll budget exhausted: residual " + ratStr(rem) +
                           " above hard ceiling after " + std::to_string(iters) +
                           " iterations");
          residual += rem;
        }
        dist = std::move(done);
        break;
      }
    }
  }

  const Program& p_;
  const TypeEnv& env_;
  const OracleBindings* bind_;
  std::shared_ptr<StateSpace> space_;
};

}  // namespace detail

inline ResidualDist interpret(const Program& p, const std::map<VarId, Value>& inputs,
                              const UnrollPolicy& policy = {},
                              const OracleBindings* bind = nullptr) {
  TypeEnv env = check(p, CheckMode::Interpret);
  return detail::Interpreter(p, env, bind).run(inputs, policy);
}

// Marginal of a state distribution on a list of variables.
inline std::map<Tuple, Rat> marginal(const ResidualDist& d,
                                     const std::vector<VarId>& vars) {
  std::vector<size_t> idx;
  for (auto& v : vars) idx.push_back(d.space->indexOf(v));
  std::map<Tuple, Rat> out;
  for (auto& [s, m] : d.pmf) {
    Tuple t;
    for (size_t i : idx) t.push_back(s[i]);
    out[t] += m;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Verdicts
// ---------------------------------------------------------------------------

struct Verdict {
  bool holds = false;
  Rat gap;             // exact witness gap when refuted
  std::string detail;  // human-readable witness / caveat

  static Verdict yes(std::string note = "") { return {true, Rat(0), std::move(note)}; }
  static Verdict no(Rat gap, std::string note) {
    return {false, std::move(gap), std::move(note)};
  }
};

// Enumerate a finite domain for a tuple of typed variables.
inline std::vector<Tuple> enumerateDomain(const std::vector<Type>& types) {
  std::vector<Tuple> out{{}};
  for (auto& t : types) {
    std::vector<Value> vals;
    if (t.base == BaseType::Bool) {
      vals = {Value::boolean(false), Value::boolean(true)};
    } else if (t.range) {
      for (long v = t.range->first; v <= t.range->second; ++v)
        vals.push_back(Value::integer(v));
    } else {
      throw CplError("domain is not finite: " + t.str());
    }
    std::vector<Tuple> next;
    for (auto& prefix : out)
      for (auto& v : vals) {
        Tuple t2 = prefix;
        t2.push_back(v);
        next.push_back(std::move(t2));
      }
    out = std::move(next);
  }
  return out;
}

// Uniformity of a variable tuple over a declared support. The truncated mass
// (1 - residual) is shared equally, with the residual as tolerance.
inline Verdict checkUniform(const ResidualDist& d, const std::vector<VarId>& vars,
                            const std::vector<Tuple>& domain) {
  if (domain.empty()) throw CplError("uniformity over an empty domain");
  auto m = marginal(d, vars);
  Rat share = (Rat(1) - d.residual) / Rat(static_cast<long>(domain.size()));
  // Mass must also stay inside the declared support.
  Rat covered(0);
  for (auto& t : domain) {
    auto it = m.find(t);
    if (it != m.end()) covered += it->second;
  }
  Rat escaped = (Rat(1) - d.residual) - covered;
  if (escaped > d.residual)
    return Verdict::no(escaped, "mass " + ratStr(escaped) + " outside declared support");
  const Tuple* lo = nullptr;
  const Tuple* hi = nullptr;
  Rat loP, hiP;
  for (auto& t : domain) {
    Rat p(0);
    auto it = m.find(t);
    if (it != m.end()) p = it->second;
    Rat dev = p - share;
    if (dev < 0) dev = -dev;
    if (dev > d.residual) {
      if (!lo || p < loP) { lo = &t; loP = p; }
      if (!hi || p > hiP) { hi = &t; hiP = p; }
    }
  }
  if (!lo) return Verdict::yes();
  // Witness pair: least-probable vs most-probable value.
  const Tuple* other = hi && hi != lo ? hi : nullptr;
  Rat gap = other ? hiP - loP : (share - loP > 0 ? share - loP : loP - share);
  std::string note = "witness (" + tupleStr(*lo) + ", " +
                     (other ? tupleStr(*other) : "expected share " + ratStr(share)) +
                     ")";
  return Verdict::no(gap, note);
}

inline Verdict checkUniform(const ResidualDist& d, const VarId& v, const Type& type) {
  auto dom = enumerateDomain({type});
  return checkUniform(d, std::vector<VarId>{v}, dom);
}

inline Verdict checkIndependent(const ResidualDist& d, const VarId& v, const VarId& w) {
  auto joint = marginal(d, {v, w});
  auto mv = marginal(d, {v});
  auto mw = marginal(d, {w});
  // Tolerance from truncation: each mass is within residual of the true one.
  Rat r = d.residual;
  Rat tol = r * 3 + r * r;
  for (auto& [tv, pv] : mv) {
    for (auto& [tw, pw] : mw) {
      Tuple t{tv[0], tw[0]};
      Rat pj(0);
      auto it = joint.find(t);
      if (it != joint.end()) pj = it->second;
      Rat dev = pj - pv * pw;
      if (dev < 0) dev = -dev;
      if (dev > tol)
        return Verdict::no(dev, "witness " + tupleStr(t) + ": joint " + ratStr(pj) +
                                    " vs product " + ratStr(pv * pw));
    }
  }
  std::string note = r > 0 ? "within residual tolerance " + ratStr(tol) : "";
  return Verdict::yes(note);
}

inline Verdict checkCondIndependent(const ResidualDist& d, const VarId& v,
                                    const VarId& w, const VarId& c) {
  if (d.residual != 0)
    throw CplError("conditional independence requires a residual-free distribution");
  auto mc = marginal(d, {c});
  auto joint3 = marginal(d, {v, w, c});
  auto mvc = marginal(d, {v, c});
  auto mwc = marginal(d, {w, c});
  std::string skipped;
  for (auto& [tc, pc] : mc) {
    if (pc == 0) continue;
    // P(v=a, w=b | c) = P(v=a | c) * P(w=b | c) for all a, b.
    std::map<Value, Rat> pv, pw;
    for (auto& [t, m] : mvc)
      if (t[1] == tc[0]) pv[t[0]] += m;
    for (auto& [t, m] : mwc)
      if (t[1] == tc[0]) pw[t[0]] += m;
    for (auto& [a, pa] : pv) {
      for (auto& [b, pb] : pw) {
        Rat pj(0);
        auto it = joint3.find(Tuple{a, b, tc[0]});
        if (it != joint3.end()) pj = it->second;
        if (pj * pc != pa * pb) {
          Rat dev = pj * pc - pa * pb;
          if (dev < 0) dev = -dev;
          return Verdict::no(dev, "witness (v=" + a.str() + ", w=" + b.str() +
                                      " | c=" + tc[0].str() + ")");
        }
      }
    }
  }
  return Verdict::yes(skipped);
}

using EventPredicate = Expr;

inline Rat eventProb(const ResidualDist& d, const EventPredicate& e,
                     const OracleBindings* bind = nullptr) {
  Rat m(0);
  for (auto& [s, p] : d.pmf) {
    Value v = evalExpr(
        e, [&](const VarId& x) { return s[d.space->indexOf(x)]; }, bind);
    if (v.b) m += p;
  }
  return m;
}

inline Verdict checkEquality(const ResidualDist& d1, const EventPredicate& e1,
                             const ResidualDist& d2, const EventPredicate& e2,
                             const OracleBindings* bind = nullptr) {
  Rat p1 = eventProb(d1, e1, bind);
  Rat p2 = eventProb(d2, e2, bind);
  Rat tol = d1.residual + d2.residual;
  Rat dev = p1 - p2;
  if (dev < 0) dev = -dev;
  if (dev > tol)
    return Verdict::no(dev, "Pr[e1] = " + ratStr(p1) + ", Pr[e2] = " + ratStr(p2));
  return Verdict::yes(tol > 0 ? "within residual tolerance " + ratStr(tol) : "");
}

}  // namespace cpl

#endif
