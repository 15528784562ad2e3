#include <gtest/gtest.h>

#include <fstream>
#include <random>
#include <sstream>

#include "cpl/check.hpp"
#include "cpl/parser.hpp"

using namespace cpl;

namespace {

std::string readFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

std::string corpus(const std::string& name) {
  return readFile(std::string(CPL_CORPUS_DIR) + "/" + name);
}

}  // namespace

TEST(Parser, FairCoinShape) {
  ParseResult r = parse(corpus("faircoin.cpl"));
  const Program& p = r.program;
  ASSERT_EQ(r.propLines.size(), 1u);
  ASSERT_EQ(p.params.size(), 1u);
  EXPECT_EQ(p.params[0].first.str(), "p");
  EXPECT_EQ(p.params[0].second.base, BaseType::Real);
  ASSERT_EQ(p.body.size(), 3u);
  EXPECT_EQ(p.body[0].kind, StmtKind::Assign);
  EXPECT_EQ(p.body[1].kind, StmtKind::Assign);
  ASSERT_EQ(p.body[2].kind, StmtKind::While);
  const StmtList& body = *p.body[2].body;
  ASSERT_EQ(body.size(), 2u);
  EXPECT_EQ(body[0].kind, StmtKind::Sample);
  EXPECT_EQ(body[0].sampleVars[0].str(), "x");
  ASSERT_EQ(body[0].dist.arity(), 1u);
  EXPECT_EQ(body[0].dist.atoms[0].kind, DistKind::Bern);
  EXPECT_EQ(p.returns.size(), 1u);
}

TEST(Parser, MinimalAssign) {
  Program p = parseProgram("x <- 1\n");
  ASSERT_EQ(p.body.size(), 1u);
  EXPECT_EQ(p.body[0].kind, StmtKind::Assign);
  EXPECT_EQ(p.body[0].target.str(), "x");
  EXPECT_EQ(p.body[0].rhs->kind, ExprKind::IntLit);
}

TEST(Parser, UseBeforeDefinitionRejected) {
  Program p = parseProgram("x <- y\n");
  try {
    check(p);
    FAIL() << "expected error";
  } catch (const CplError& e) {
    EXPECT_NE(std::string(e.what()).find("use before definition"), std::string::npos);
  }
}

TEST(Parser, SyntaxErrorHasLocation) {
  try {
    parseProgram("x <- (1 + \n");
    FAIL() << "expected error";
  } catch (const CplError& e) {
    EXPECT_GT(e.loc.line, 0);
  }
}

TEST(Parser, UnknownDistribution) {
  EXPECT_THROW(parseProgram("x ~ gauss(1)\n"), CplError);
}

TEST(Parser, ForDesugarsToCounterWhile) {
  Program p = parseProgram(corpus("noisysum.cpl"));
  // sum <- 0; i <- 1; while i <= 3 { ... }
  ASSERT_EQ(p.body.size(), 3u);
  ASSERT_EQ(p.body[2].kind, StmtKind::While);
  ASSERT_TRUE(p.body[2].counter.has_value());
  EXPECT_EQ(p.body[2].counter->counter.str(), "i");
  const StmtList& body = *p.body[2].body;
  EXPECT_EQ(body.back().kind, StmtKind::Assign);
  EXPECT_EQ(body.back().target.str(), "i");
}

TEST(Parser, ArrayElementNames) {
  Program p = parseProgram(corpus("noisysum.cpl"));
  const StmtList& body = *p.body[2].body;
  EXPECT_EQ(body[0].kind, StmtKind::Sample);
  EXPECT_EQ(body[0].sampleVars[0].str(), "noise[i]");
}

TEST(Parser, RoundTripCorpus) {
  for (const char* name :
       {"faircoin.cpl", "fairdie.cpl", "noisysum.cpl", "bayes.cpl", "ballot.cpl"}) {
    Program p = parseProgram(corpus(name));
    Program q = parseProgram(pretty(p));
    EXPECT_TRUE(programEq(p, q)) << "round trip failed for " << name;
    EXPECT_EQ(pretty(p), pretty(q));
  }
}

TEST(Parser, RoundTripExpressions) {
  // Exercise precedence and associativity corners through the printer.
  const char* progs[] = {
      "param a: int\nparam b: int\nx <- a + b * a - -b\n",
      "param u: bool\nparam v: bool\nx <- !(u && v) || u && !v\n",
      "param a: int\nx <- ite(a = 1, a + 2, a - 2) * a\n",
      "param u: bool\nparam v: bool\nx <- (u = v) = (v = u)\n",
      "param a: int\nparam b: int\nx <- a - (b - 1) - b\n",
  };
  for (const char* s : progs) {
    Program p = parseProgram(s);
    Program q = parseProgram(pretty(p));
    EXPECT_TRUE(programEq(p, q)) << s << "\nvs\n" << pretty(p);
  }
}

TEST(Check, CorpusAccepted) {
  for (const char* name :
       {"faircoin.cpl", "fairdie.cpl", "noisysum.cpl", "bayes.cpl", "ballot.cpl"}) {
    Program p = parseProgram(corpus(name));
    EXPECT_NO_THROW(check(p)) << name;
  }
}

TEST(Check, FairCoinEnv) {
  TypeEnv env = check(parseProgram(corpus("faircoin.cpl")));
  EXPECT_EQ(env.typeOf(VarId("p")).base, BaseType::Real);
  EXPECT_EQ(env.typeOf(VarId("x")).base, BaseType::Bool);
  EXPECT_EQ(env.typeOf(VarId("y")).base, BaseType::Bool);
  EXPECT_TRUE(env.inputs.count(VarId("p")));
  EXPECT_TRUE(env.carried.count(VarId("x")));
}

TEST(Check, DoubleAssignmentRejected) {
  Program p = parseProgram("x <- 1\nx <- 2\n");
  try {
    check(p);
    FAIL() << "expected SSA violation";
  } catch (const CplError& e) {
    EXPECT_NE(std::string(e.what()).find("SSA violation"), std::string::npos);
  }
}

TEST(Check, DistMentionsNonInputRejected) {
  Program p = parseProgram("param q: real\ny <- q\nx ~ bern(y)\n");
  try {
    check(p);
    FAIL() << "expected discipline violation";
  } catch (const CplError& e) {
    EXPECT_NE(std::string(e.what()).find("non-input"), std::string::npos);
  }
}

TEST(Check, CorpusWithInjectedFaultsRejected) {
  // One injected SSA or scoping fault per corpus program.
  const std::pair<const char*, const char*> faults[] = {
      {"faircoin.cpl", "x <- false"},     // duplicate pre-loop definition
      {"fairdie.cpl", "x <- false"},
      {"noisysum.cpl", "sum <- 0"},
      {"bayes.cpl", "w <- F(x, y)"},
      {"ballot.cpl", "undefined_read <- nowhere"},
  };
  for (auto& [name, extra] : faults) {
    std::string src = corpus(name);
    src += std::string(extra) + "\n";
    Program p = parseProgram(src);
    EXPECT_THROW(check(p), CplError) << name;
  }
}

TEST(Check, LoopNestingRejected) {
  Program p = parseProgram("x <- true\nwhile x {\n  while x {\n    x ~ bern(1/2)\n  }\n}\n");
  try {
    check(p);
    FAIL();
  } catch (const CplError& e) {
    EXPECT_NE(std::string(e.what()).find("loop nesting"), std::string::npos);
  }
  // The interpreter mode has no such restriction.
  EXPECT_NO_THROW(check(p, CheckMode::Interpret));
}

TEST(Check, TwoTopLevelLoopsRejectedInVerifyMode) {
  Program p = parseProgram(
      "x <- true\nwhile x {\n  x ~ bern(1/2)\n}\nwhile x {\n  x ~ bern(1/2)\n}\n");
  EXPECT_THROW(check(p), CplError);
  EXPECT_NO_THROW(check(p, CheckMode::Interpret));
}

TEST(Check, AssignTwicePerIterationRejected) {
  Program p = parseProgram(
      "x <- true\nwhile x {\n  x ~ bern(1/2)\n  x <- !x\n}\n");
  EXPECT_THROW(check(p), CplError);
}

TEST(Check, BallotDefaultInit) {
  TypeEnv env = check(parseProgram(corpus("ballot.cpl")));
  // `first` and `r` are only assigned inside the loop body.
  EXPECT_TRUE(env.defaultInit.count(VarId("first")));
  EXPECT_TRUE(env.defaultInit.count(VarId("r")));
  EXPECT_FALSE(env.defaultInit.count(VarId("xA")));
}

TEST(Check, TypeMismatchRejected) {
  EXPECT_THROW(check(parseProgram("x <- 1 + true\n")), CplError);
  EXPECT_THROW(check(parseProgram("x <- true\ny <- x + 1\n")), CplError);
  EXPECT_THROW(check(parseProgram("x ~ bern(true)\n")), CplError);
}
