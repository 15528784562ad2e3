#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "cpl/parser.hpp"
#include "cpl/semantics.hpp"

using namespace cpl;

namespace {

std::string corpus(const std::string& name) {
  std::ifstream in(std::string(CPL_CORPUS_DIR) + "/" + name);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

Value VB(bool b) { return Value::boolean(b); }
Value VI(long i) { return Value::integer(i); }
Value VR(long n, long d) { return Value::rational(Rat(n, d)); }

DistExpr bernOf(const Rat& r) {
  DistAtom a;
  a.kind = DistKind::Bern;
  a.param = ratLit(r);
  return DistExpr{{a}};
}

}  // namespace

TEST(EvalDist, BernHalf) {
  auto env = [](const VarId&) -> Value { throw CplError("no vars"); };
  TupleDist d = evalDist(bernOf(Rat(1, 2)), env);
  ASSERT_EQ(d.pmf.size(), 2u);
  EXPECT_EQ(d.pmf[{VB(true)}], Rat(1, 2));
  EXPECT_EQ(d.pmf[{VB(false)}], Rat(1, 2));
}

TEST(EvalDist, ProductOfBerns) {
  // bern(1/3) x bern(1/3): (t,t) 1/9, (t,f) 2/9, (f,t) 2/9, (f,f) 4/9.
  DistAtom a;
  a.kind = DistKind::Bern;
  a.param = varRef(VarId("p"));
  DistExpr d{{a, a}};
  auto env = [](const VarId&) { return Value::rational(Rat(1, 3)); };
  TupleDist td = evalDist(d, env);
  EXPECT_EQ((td.pmf[{VB(true), VB(true)}]), Rat(1, 9));
  EXPECT_EQ((td.pmf[{VB(true), VB(false)}]), Rat(2, 9));
  EXPECT_EQ((td.pmf[{VB(false), VB(true)}]), Rat(2, 9));
  EXPECT_EQ((td.pmf[{VB(false), VB(false)}]), Rat(4, 9));
}

TEST(EvalDist, UniformInt) {
  DistAtom a;
  a.kind = DistKind::UniformInt;
  a.lo = 1;
  a.hi = 6;
  auto env = [](const VarId&) -> Value { throw CplError("no vars"); };
  TupleDist d = evalDist(DistExpr{{a}}, env);
  ASSERT_EQ(d.pmf.size(), 6u);
  for (long v = 1; v <= 6; ++v) EXPECT_EQ(d.pmf[{VI(v)}], Rat(1, 6));
}

TEST(EvalDist, BernOutOfRangeRejected) {
  auto env = [](const VarId&) { return Value::rational(Rat(5, 4)); };
  DistAtom a;
  a.kind = DistKind::Bern;
  a.param = varRef(VarId("p"));
  EXPECT_THROW(evalDist(DistExpr{{a}}, env), CplError);
}

TEST(EvalDist, OpaqueRejectedWithoutBinding) {
  DistAtom a;
  a.kind = DistKind::Opaque;
  a.name = "mu";
  a.opaqueType = Type::boolean();
  auto env = [](const VarId&) -> Value { throw CplError("no vars"); };
  EXPECT_THROW(evalDist(DistExpr{{a}}, env), CplError);
}

TEST(Interpret, SingleSample) {
  Program p = parseProgram("x ~ bern(1/4)\n");
  ResidualDist d = interpret(p, {});
  EXPECT_EQ(d.residual, Rat(0));
  auto m = marginal(d, {VarId("x")});
  EXPECT_EQ(m[{VB(true)}], Rat(1, 4));
  EXPECT_EQ(m[{VB(false)}], Rat(3, 4));
}

TEST(Interpret, FairCoinGeometric) {
  // Per-iteration exit probability at p=1/2 is 1/2, exits symmetric, so after
  // k rounds each outcome holds (1 - (1/2)^k) / 2 exactly.
  Program p = parseProgram(corpus("faircoin.cpl"));
  ResidualDist d = interpret(p, {{VarId("p"), VR(1, 2)}});
  EXPECT_LE(d.residual, Rat(1, 1000000000));
  Rat half = (Rat(1) - d.residual) / 2;
  auto m = marginal(d, {VarId("x")});
  EXPECT_EQ(m[{VB(true)}], half);
  EXPECT_EQ(m[{VB(false)}], half);
  EXPECT_EQ(d.mass(), Rat(1));
}

TEST(Interpret, FairCoinResidualClosedForm) {
  // At p=1/3 the loop continues with probability p^2 + (1-p)^2 = 5/9; after
  // 50 iterations the in-loop mass is exactly (5/9)^50.
  Program p = parseProgram(corpus("faircoin.cpl"));
  UnrollPolicy policy;
  policy.maxIters = 50;
  policy.residualTarget = Rat(0);
  policy.hardCeiling = std::nullopt;
  ResidualDist d = interpret(p, {{VarId("p"), VR(1, 3)}}, policy);
  EXPECT_EQ(d.residual, ratPow(Rat(5, 9), 50));
  EXPECT_EQ(d.mass(), Rat(1));
}

TEST(Interpret, FairDieSixTriples) {
  Program p = parseProgram(corpus("fairdie.cpl"));
  ResidualDist d = interpret(p, {});
  EXPECT_LE(d.residual, Rat(1, 1000000000));
  auto m = marginal(d, {VarId("x"), VarId("y"), VarId("z")});
  Rat share = (Rat(1) - d.residual) / 6;
  int seen = 0;
  for (bool x : {false, true})
    for (bool y : {false, true})
      for (bool z : {false, true}) {
        Tuple t{VB(x), VB(y), VB(z)};
        bool allEq = (x == y && y == z);
        auto it = m.find(t);
        if (allEq) {
          EXPECT_TRUE(it == m.end()) << "extreme triple should be absent";
        } else {
          ASSERT_TRUE(it != m.end());
          EXPECT_EQ(it->second, share);
          ++seen;
        }
      }
  EXPECT_EQ(seen, 6);
}

TEST(Interpret, LoopFreeIgnoresPolicy) {
  Program p = parseProgram("x ~ bern(1/4)\ny <- !x\n");
  UnrollPolicy tight;
  tight.maxIters = 1;
  UnrollPolicy loose;
  loose.maxIters = 100000;
  ResidualDist a = interpret(p, {}, tight);
  ResidualDist b = interpret(p, {}, loose);
  EXPECT_EQ(a.residual, Rat(0));
  EXPECT_EQ(a.pmf, b.pmf);
}

TEST(Interpret, DoublingBudgetNeverIncreasesResidual) {
  Program p = parseProgram(corpus("faircoin.cpl"));
  UnrollPolicy policy;
  policy.residualTarget = Rat(0);
  policy.hardCeiling = std::nullopt;
  Rat prev(2);
  for (size_t budget : {4, 8, 16, 32}) {
    policy.maxIters = budget;
    ResidualDist d = interpret(p, {{VarId("p"), VR(1, 3)}}, policy);
    EXPECT_LE(d.residual, prev);
    prev = d.residual;
  }
}

TEST(Interpret, BudgetExhaustionIsAnError) {
  Program p = parseProgram(corpus("faircoin.cpl"));
  UnrollPolicy policy;
  policy.maxIters = 3;
  policy.residualTarget = Rat(1, 1000000000);
  policy.hardCeiling = Rat(1, 1000000000);
  EXPECT_THROW(interpret(p, {{VarId("p"), VR(1, 2)}}, policy), CplError);
}

TEST(Interpret, MassAlwaysExactlyOne) {
  for (const char* name : {"faircoin.cpl", "fairdie.cpl", "noisysum.cpl", "ballot.cpl"}) {
    Program p = parseProgram(corpus(name));
    std::map<VarId, Value> inputs;
    for (auto& [v, t] : p.params)
      inputs[v] = t.base == BaseType::Real ? VR(1, 2) : VI(2);
    ResidualDist d = interpret(p, inputs);
    EXPECT_EQ(d.mass(), Rat(1)) << name;
    for (auto& [s, m] : d.pmf) EXPECT_GT(m, Rat(0));
  }
}

TEST(CheckUniform, FairCoinAtTwoThirds) {
  Program p = parseProgram(corpus("faircoin.cpl"));
  ResidualDist d = interpret(p, {{VarId("p"), VR(2, 3)}});
  Verdict v = checkUniform(d, VarId("x"), Type::boolean());
  EXPECT_TRUE(v.holds) << v.detail;
}

TEST(CheckUniform, BiasedCoinRefutedWithWitness) {
  Program p = parseProgram("x ~ bern(1/4)\n");
  ResidualDist d = interpret(p, {});
  Verdict v = checkUniform(d, VarId("x"), Type::boolean());
  EXPECT_FALSE(v.holds);
  EXPECT_EQ(v.gap, Rat(1, 2));
  EXPECT_NE(v.detail.find("true"), std::string::npos);
  EXPECT_NE(v.detail.find("false"), std::string::npos);
}

TEST(CheckUniform, FairDieOverExitTriples) {
  Program p = parseProgram(corpus("fairdie.cpl"));
  ResidualDist d = interpret(p, {});
  std::vector<Tuple> support;
  for (bool x : {false, true})
    for (bool y : {false, true})
      for (bool z : {false, true})
        if (!(x == y && y == z)) support.push_back({VB(x), VB(y), VB(z)});
  Verdict v = checkUniform(d, {VarId("x"), VarId("y"), VarId("z")}, support);
  EXPECT_TRUE(v.holds) << v.detail;
}

TEST(CheckIndependent, SeparateSamples) {
  Program p = parseProgram("x ~ bern(1/2)\ny ~ bern(1/3)\n");
  ResidualDist d = interpret(p, {});
  EXPECT_TRUE(checkIndependent(d, VarId("x"), VarId("y")).holds);
}

TEST(CheckIndependent, CopyRefuted) {
  Program p = parseProgram("x ~ bern(1/2)\ny <- x\n");
  ResidualDist d = interpret(p, {});
  Verdict v = checkIndependent(d, VarId("x"), VarId("y"));
  EXPECT_FALSE(v.holds);
  EXPECT_NE(v.detail.find("(true, true)"), std::string::npos);
}

TEST(CheckIndependent, NoisySumPairwise) {
  // n = 3 hand-enumerable: 8 outcomes; noise[1] and noise[2] independent.
  Program p = parseProgram(corpus("noisysum.cpl"));
  ResidualDist d = interpret(p, {{VarId("p"), VR(1, 2)}});
  EXPECT_EQ(d.residual, Rat(0));
  EXPECT_TRUE(checkIndependent(d, VarId("noise[1]"), VarId("noise[2]")).holds);
  ResidualDist d2 = interpret(p, {{VarId("p"), VR(1, 3)}});
  EXPECT_TRUE(checkIndependent(d2, VarId("noise[1]"), VarId("noise[2]")).holds);
}

TEST(CheckCondIndependent, BayesConcrete) {
  Program p = parseProgram(corpus("bayes.cpl"));
  OracleBindings bind;
  bind.dists["mu"] = bernOf(Rat(1, 2));
  bind.dists["mu'"] = bernOf(Rat(1, 2));
  bind.dists["mu''"] = bernOf(Rat(1, 2));
  bind.funs["F"] = "and";
  bind.funs["G"] = "or";
  ResidualDist d = interpret(p, {}, {}, &bind);
  EXPECT_TRUE(checkCondIndependent(d, VarId("w"), VarId("w'"), VarId("y")).holds);
  // Second instantiation: F = xor, G = and.
  bind.funs["F"] = "xor";
  bind.funs["G"] = "and";
  ResidualDist d2 = interpret(p, {}, {}, &bind);
  EXPECT_TRUE(checkCondIndependent(d2, VarId("w"), VarId("w'"), VarId("y")).holds);
}

TEST(CheckCondIndependent, SharedCopyRefuted) {
  Program p = parseProgram(
      "x ~ bern(1/2)\ny ~ bern(1/2)\nw <- x\nw' <- x\n");
  ResidualDist d = interpret(p, {});
  Verdict v = checkCondIndependent(d, VarId("w"), VarId("w'"), VarId("y"));
  EXPECT_FALSE(v.holds);
}

TEST(CheckCondIndependent, ConditionedOnSelf) {
  Program p = parseProgram("x ~ bern(1/2)\ny ~ bern(1/3)\n");
  ResidualDist d = interpret(p, {});
  EXPECT_TRUE(checkCondIndependent(d, VarId("x"), VarId("y"), VarId("x")).holds);
}

TEST(CheckEquality, BallotReflection) {
  Program p = parseProgram(corpus("ballot.cpl"));
  Expr e1 = parseProgram("param first: bool\nparam tie: bool\nparam xA: int\n"
                         "param xB: int\nparam nA: int\nparam nB: int\n"
                         "q <- !first && tie && xA = nA && xB = nB\n")
                .body[0]
                .rhs;
  Expr e2 = parseProgram("param first: bool\nparam tie: bool\nparam xA: int\n"
                         "param xB: int\nparam nA: int\nparam nB: int\n"
                         "q <- first && tie && xA = nA && xB = nB\n")
                .body[0]
                .rhs;
  for (auto [n, nA, nB] : std::vector<std::tuple<long, long, long>>{
           {2, 1, 1}, {3, 2, 1}, {4, 2, 2}, {4, 3, 1}, {5, 3, 2}}) {
    std::map<VarId, Value> in{{VarId("n"), VI(n)},
                              {VarId("nA"), VI(nA)},
                              {VarId("nB"), VI(nB)}};
    ResidualDist d = interpret(p, in);
    EXPECT_EQ(d.residual, Rat(0));
    Verdict v = checkEquality(d, e1, d, e2);
    EXPECT_TRUE(v.holds) << "n=" << n << " " << v.detail;
  }
}

TEST(CheckEquality, SameDistSameEvent) {
  Program p = parseProgram("x ~ bern(1/3)\n");
  ResidualDist d = interpret(p, {});
  Expr e = varRef(VarId("x"));
  EXPECT_TRUE(checkEquality(d, e, d, e).holds);
}

TEST(CheckEquality, QuarterGap) {
  ResidualDist d1 = interpret(parseProgram("x ~ bern(1/4)\n"), {});
  ResidualDist d2 = interpret(parseProgram("x ~ bern(1/2)\n"), {});
  Expr e = varRef(VarId("x"));
  Verdict v = checkEquality(d1, e, d2, e);
  EXPECT_FALSE(v.holds);
  EXPECT_EQ(v.gap, Rat(1, 4));
}
