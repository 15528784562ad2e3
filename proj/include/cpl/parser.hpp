#ifndef CPL_PARSER_HPP
#define CPL_PARSER_HPP

#include <cctype>
#include <map>
#include <string>
#include <vector>

#include "cpl/ast.hpp"

// Concrete syntax for the .cpl program format: keyword-based line syntax
//
//   param p: real
//   x <- false
//   (x, y) ~ bern(p) * bern(p)
//   if e { ... } else { ... }
//   while e { ... }
//   for i = 1 .. n { ... }        (sugar: counter-driven while)
//   return (x, y)
//
// `prop:` header lines are collected verbatim; their grammar belongs to the
// driver (see task.hpp). Comments run from '#' to end of line. Statements are
// newline- or ';'-separated. Array-style names like noise[i] are scalar
// variables whose printed name carries the bracket; the checker restricts the
// index to the enclosing loop counter or a literal.

namespace cpl {

struct ParseResult {
  Program program;
  std::vector<std::string> propLines;
};

namespace detail {

enum class Tok {
  Ident, Int, KwTrue, KwFalse, KwIf, KwElse, KwWhile, KwFor, KwReturn,
  KwParam, KwDist, KwUfun, KwIte, KwBool, KwInt, KwReal,
  Arrow, Tilde, LBrace, RBrace, LParen, RParen, Comma, Colon, Semi, DotDot,
  OpOr, OpAnd, OpNot, OpEq, OpNe, OpLt, OpLe, OpGt, OpGe, OpAdd, OpSub, OpMul,
  Slash, Newline, End,
};

struct Token {
  Tok kind;
  std::string text;
  long intVal = 0;
  SourceLoc loc;
};

class Lexer {
 public:
  explicit Lexer(const std::string& src) : src_(src) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    while (pos_ < src_.size()) {
      char c = src_[pos_];
      if (c == '#') {
        while (pos_ < src_.size() && src_[pos_] != '\n') ++pos_;
        continue;
      }
      if (c == '\n') {
        out.push_back({Tok::Newline, "\\n", 0, here()});
        advance();
        continue;
      }
      if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
        continue;
      }
      if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
        out.push_back(identifier());
        continue;
      }
      if (std::isdigit(static_cast<unsigned char>(c))) {
        out.push_back(number());
        continue;
      }
      out.push_back(symbol());
    }
    out.push_back({Tok::End, "<eof>", 0, here()});
    return out;
  }

 private:
  SourceLoc here() const { return {line_, col_}; }
  void advance() {
    if (src_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++pos_;
  }

  Token identifier() {
    SourceLoc loc = here();
    std::string s;
    while (pos_ < src_.size() &&
           (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_')) {
      s += src_[pos_];
      advance();
    }
    while (pos_ < src_.size() && src_[pos_] == '\'') {
      s += '\'';
      advance();
    }
    // Array-style element: fold name[tok] into a single scalar name.
    if (pos_ < src_.size() && src_[pos_] == '[') {
      size_t save = pos_;
      int saveLine = line_, saveCol = col_;
      advance();
      std::string idx;
      while (pos_ < src_.size() &&
             (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_')) {
        idx += src_[pos_];
        advance();
      }
      if (!idx.empty() && pos_ < src_.size() && src_[pos_] == ']') {
        advance();
        return {Tok::Ident, s + "[" + idx + "]", 0, loc};
      }
      pos_ = save;
      line_ = saveLine;
      col_ = saveCol;
    }
    static const std::map<std::string, Tok> kws = {
        {"true", Tok::KwTrue},   {"false", Tok::KwFalse}, {"if", Tok::KwIf},
        {"else", Tok::KwElse},   {"while", Tok::KwWhile}, {"for", Tok::KwFor},
        {"return", Tok::KwReturn}, {"param", Tok::KwParam}, {"dist", Tok::KwDist},
        {"ufun", Tok::KwUfun},   {"ite", Tok::KwIte},     {"bool", Tok::KwBool},
        {"int", Tok::KwInt},     {"real", Tok::KwReal},
    };
    auto it = kws.find(s);
    if (it != kws.end()) return {it->second, s, 0, loc};
    return {Tok::Ident, s, 0, loc};
  }

  Token number() {
    SourceLoc loc = here();
    std::string s;
    while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
      s += src_[pos_];
      advance();
    }
    return {Tok::Int, s, std::stol(s), loc};
  }

  Token symbol() {
    SourceLoc loc = here();
    auto two = src_.substr(pos_, 2);
    auto emit2 = [&](Tok k) {
      advance();
      advance();
      return Token{k, two, 0, loc};
    };
    if (two == "<-") return emit2(Tok::Arrow);
    if (two == "..") return emit2(Tok::DotDot);
    if (two == "||") return emit2(Tok::OpOr);
    if (two == "&&") return emit2(Tok::OpAnd);
    if (two == "!=") return emit2(Tok::OpNe);
    if (two == "<=") return emit2(Tok::OpLe);
    if (two == ">=") return emit2(Tok::OpGe);
    char c = src_[pos_];
    advance();
    switch (c) {
      case '~': return {Tok::Tilde, "~", 0, loc};
      case '{': return {Tok::LBrace, "{", 0, loc};
      case '}': return {Tok::RBrace, "}", 0, loc};
      case '(': return {Tok::LParen, "(", 0, loc};
      case ')': return {Tok::RParen, ")", 0, loc};
      case ',': return {Tok::Comma, ",", 0, loc};
      case ':': return {Tok::Colon, ":", 0, loc};
      case ';': return {Tok::Semi, ";", 0, loc};
      case '!': return {Tok::OpNot, "!", 0, loc};
      case '=': return {Tok::OpEq, "=", 0, loc};
      case '<': return {Tok::OpLt, "<", 0, loc};
      case '>': return {Tok::OpGt, ">", 0, loc};
      case '+': return {Tok::OpAdd, "+", 0, loc};
      case '-': return {Tok::OpSub, "-", 0, loc};
      case '*': return {Tok::OpMul, "*", 0, loc};
      case '/': return {Tok::Slash, "/", 0, loc};
    }
    throw CplError(std::string("unexpected character '") + c + "'", loc);
  }

  const std::string& src_;
  size_t pos_ = 0;
  int line_ = 1, col_ = 1;
};

class Parser {
 public:
  explicit Parser(std::vector<Token> toks) : toks_(std::move(toks)) {}

  Program run() {
    Program p;
    skipSeparators();
    while (!at(Tok::End)) {
      if (at(Tok::KwParam)) {
        next();
        Token name = expect(Tok::Ident, "parameter name");
        expect(Tok::Colon, "':'");
        p.params.emplace_back(VarId(name.text), parseType());
      } else if (at(Tok::KwDist)) {
        next();
        Token name = expect(Tok::Ident, "distribution name");
        expect(Tok::Colon, "':'");
        p.opaqueDists[name.text] = parseType();
      } else if (at(Tok::KwUfun)) {
        next();
        Token name = expect(Tok::Ident, "function name");
        expect(Tok::LParen, "'('");
        UFunDecl d;
        if (!at(Tok::RParen)) {
          d.argTypes.push_back(parseType());
          while (at(Tok::Comma)) {
            next();
            d.argTypes.push_back(parseType());
          }
        }
        expect(Tok::RParen, "')'");
        expect(Tok::Colon, "':'");
        d.retType = parseType();
        p.ufuns[name.text] = d;
      } else if (at(Tok::KwReturn)) {
        next();
        if (at(Tok::LParen)) {
          next();
          p.returns.push_back(VarId(expect(Tok::Ident, "variable").text));
          while (at(Tok::Comma)) {
            next();
            p.returns.push_back(VarId(expect(Tok::Ident, "variable").text));
          }
          expect(Tok::RParen, "')'");
        } else {
          p.returns.push_back(VarId(expect(Tok::Ident, "variable").text));
        }
      } else {
        parseStmtInto(p, p.body);
      }
      endOfStmt();
    }
    return p;
  }

 private:
  const Token& cur() const { return toks_[i_]; }
  bool at(Tok k) const { return cur().kind == k; }
  Token next() { return toks_[i_++]; }
  Token expect(Tok k, const std::string& what) {
    if (!at(k)) throw CplError("expected " + what + ", found '" + cur().text + "'", cur().loc);
    return next();
  }
  void skipSeparators() {
    while (at(Tok::Newline) || at(Tok::Semi)) next();
  }
  void endOfStmt() {
    if (at(Tok::End)) return;
    if (!at(Tok::Newline) && !at(Tok::Semi) && !at(Tok::RBrace))
      throw CplError("expected end of statement, found '" + cur().text + "'", cur().loc);
    skipSeparators();
  }

  Type parseType() {
    if (at(Tok::KwBool)) {
      next();
      return Type::boolean();
    }
    if (at(Tok::KwInt)) {
      next();
      return Type::integer();
    }
    if (at(Tok::KwReal)) {
      next();
      return Type::real();
    }
    throw CplError("expected type (bool, int, real)", cur().loc);
  }

  StmtList parseBlock(Program& p) {
    expect(Tok::LBrace, "'{'");
    skipSeparators();
    StmtList body;
    while (!at(Tok::RBrace)) {
      parseStmtInto(p, body);
      endOfStmt();
    }
    expect(Tok::RBrace, "'}'");
    return body;
  }

  void parseStmtInto(Program& p, StmtList& out) {
    SourceLoc loc = cur().loc;
    if (at(Tok::KwIf)) {
      next();
      Expr cond = parseExpr(p);
      StmtList thenB = parseBlock(p);
      StmtList elseB;
      size_t save = i_;
      skipSeparators();
      if (at(Tok::KwElse)) {
        next();
        elseB = parseBlock(p);
      } else {
        i_ = save;
      }
      out.push_back(mkIf(cond, std::move(thenB), std::move(elseB), loc));
      return;
    }
    if (at(Tok::KwWhile)) {
      next();
      Expr cond = parseExpr(p);
      StmtList body = parseBlock(p);
      out.push_back(mkWhile(cond, std::move(body), std::nullopt, loc));
      return;
    }
    if (at(Tok::KwFor)) {
      next();
      Token name = expect(Tok::Ident, "counter variable");
      expect(Tok::OpEq, "'='");
      Expr lo = parseExpr(p);
      expect(Tok::DotDot, "'..'");
      Expr hi = parseExpr(p);
      StmtList body = parseBlock(p);
      // for i = lo .. hi  ==>  i <- lo; while i <= hi { body; i <- i + 1 }
      VarId ctr(name.text);
      body.push_back(mkAssign(ctr, mkExpr(ExprKind::Add, {varRef(ctr), intLit(1)}), loc));
      out.push_back(mkAssign(ctr, lo, loc));
      out.push_back(mkWhile(mkExpr(ExprKind::Le, {varRef(ctr), hi}), std::move(body),
                            CounterInfo{ctr, hi}, loc));
      return;
    }
    // Assignment or sample; both start with a target.
    std::vector<VarId> targets;
    if (at(Tok::LParen)) {
      next();
      targets.push_back(VarId(expect(Tok::Ident, "variable").text));
      while (at(Tok::Comma)) {
        next();
        targets.push_back(VarId(expect(Tok::Ident, "variable").text));
      }
      expect(Tok::RParen, "')'");
    } else {
      targets.push_back(VarId(expect(Tok::Ident, "statement").text));
    }
    if (at(Tok::Arrow)) {
      if (targets.size() != 1) throw CplError("assignment takes a single target", loc);
      next();
      out.push_back(mkAssign(targets[0], parseExpr(p), loc));
      return;
    }
    expect(Tok::Tilde, "'<-' or '~'");
    DistExpr d;
    d.atoms.push_back(parseDistAtom(p));
    while (at(Tok::OpMul)) {
      next();
      d.atoms.push_back(parseDistAtom(p));
    }
    if (d.arity() != targets.size())
      throw CplError("sample arity mismatch: " + std::to_string(targets.size()) +
                         " variables, " + std::to_string(d.arity()) + " distributions",
                     loc);
    out.push_back(mkSample(std::move(targets), std::move(d), loc));
  }

  DistAtom parseDistAtom(Program& p) {
    Token t = expect(Tok::Ident, "distribution");
    DistAtom a;
    if (t.text == "bern") {
      a.kind = DistKind::Bern;
      expect(Tok::LParen, "'('");
      a.param = parseExpr(p);
      expect(Tok::RParen, "')'");
      return a;
    }
    if (t.text == "uniformInt") {
      a.kind = DistKind::UniformInt;
      expect(Tok::LParen, "'('");
      a.lo = parseSignedInt();
      expect(Tok::Comma, "','");
      a.hi = parseSignedInt();
      expect(Tok::RParen, "')'");
      if (a.lo > a.hi) throw CplError("empty uniformInt range", t.loc);
      return a;
    }
    auto it = p.opaqueDists.find(t.text);
    if (it == p.opaqueDists.end())
      throw CplError("unknown distribution name '" + t.text + "'", t.loc);
    a.kind = DistKind::Opaque;
    a.name = t.text;
    a.opaqueType = it->second;
    return a;
  }

  long parseSignedInt() {
    bool neg = false;
    if (at(Tok::OpSub)) {
      next();
      neg = true;
    }
    Token t = expect(Tok::Int, "integer");
    return neg ? -t.intVal : t.intVal;
  }

  // Precedence climbing; comparison operators associate left so that the
  // pretty printer round-trips.
  Expr parseExpr(Program& p) { return parseOr(p); }

  Expr parseOr(Program& p) {
    Expr e = parseAnd(p);
    while (at(Tok::OpOr)) {
      SourceLoc loc = next().loc;
      e = mkExpr(ExprKind::Or, {e, parseAnd(p)}, loc);
    }
    return e;
  }
  Expr parseAnd(Program& p) {
    Expr e = parseCmp(p);
    while (at(Tok::OpAnd)) {
      SourceLoc loc = next().loc;
      e = mkExpr(ExprKind::And, {e, parseCmp(p)}, loc);
    }
    return e;
  }
  Expr parseCmp(Program& p) {
    Expr e = parseAdd(p);
    while (true) {
      ExprKind k;
      if (at(Tok::OpEq)) k = ExprKind::Eq;
      else if (at(Tok::OpNe)) k = ExprKind::Ne;
      else if (at(Tok::OpLt)) k = ExprKind::Lt;
      else if (at(Tok::OpLe)) k = ExprKind::Le;
      else if (at(Tok::OpGt)) k = ExprKind::Gt;
      else if (at(Tok::OpGe)) k = ExprKind::Ge;
      else return e;
      SourceLoc loc = next().loc;
      e = mkExpr(k, {e, parseAdd(p)}, loc);
    }
  }
  Expr parseAdd(Program& p) {
    Expr e = parseMul(p);
    while (at(Tok::OpAdd) || at(Tok::OpSub)) {
      ExprKind k = at(Tok::OpAdd) ? ExprKind::Add : ExprKind::Sub;
      SourceLoc loc = next().loc;
      e = mkExpr(k, {e, parseMul(p)}, loc);
    }
    return e;
  }
  Expr parseMul(Program& p) {
    Expr e = parseUnary(p);
    while (at(Tok::OpMul)) {
      SourceLoc loc = next().loc;
      e = mkExpr(ExprKind::Mul, {e, parseUnary(p)}, loc);
    }
    return e;
  }
  Expr parseUnary(Program& p) {
    if (at(Tok::OpNot)) {
      SourceLoc loc = next().loc;
      return mkExpr(ExprKind::Not, {parseUnary(p)}, loc);
    }
    if (at(Tok::OpSub)) {
      SourceLoc loc = next().loc;
      return mkExpr(ExprKind::Neg, {parseUnary(p)}, loc);
    }
    return parsePrimary(p);
  }
  Expr parsePrimary(Program& p) {
    SourceLoc loc = cur().loc;
    if (at(Tok::KwTrue)) {
      next();
      return boolLit(true, loc);
    }
    if (at(Tok::KwFalse)) {
      next();
      return boolLit(false, loc);
    }
    if (at(Tok::Int)) {
      Token t = next();
      if (at(Tok::Slash)) {
        next();
        Token d = expect(Tok::Int, "denominator");
        if (d.intVal == 0) throw CplError("zero denominator", d.loc);
        return ratLit(Rat(t.intVal, d.intVal), loc);
      }
      return intLit(t.intVal, loc);
    }
    if (at(Tok::KwIte)) {
      next();
      expect(Tok::LParen, "'('");
      Expr c = parseExpr(p);
      expect(Tok::Comma, "','");
      Expr a = parseExpr(p);
      expect(Tok::Comma, "','");
      Expr b = parseExpr(p);
      expect(Tok::RParen, "')'");
      return mkExpr(ExprKind::Ite, {c, a, b}, loc);
    }
    if (at(Tok::LParen)) {
      next();
      Expr e = parseExpr(p);
      expect(Tok::RParen, "')'");
      return e;
    }
    if (at(Tok::Ident)) {
      Token t = next();
      if (at(Tok::LParen)) {
        if (!p.ufuns.count(t.text))
          throw CplError("unknown function '" + t.text + "'", t.loc);
        next();
        std::vector<Expr> args;
        if (!at(Tok::RParen)) {
          args.push_back(parseExpr(p));
          while (at(Tok::Comma)) {
            next();
            args.push_back(parseExpr(p));
          }
        }
        expect(Tok::RParen, "')'");
        return appExpr(t.text, std::move(args), loc);
      }
      return varRef(VarId(t.text), loc);
    }
    throw CplError("expected expression, found '" + cur().text + "'", loc);
  }

  std::vector<Token> toks_;
  size_t i_ = 0;
};

}  // namespace detail

inline ParseResult parse(const std::string& text) {
  ParseResult result;
  // prop: headers are collected verbatim; everything else goes to the lexer.
  std::string rest;
  size_t pos = 0;
  while (pos <= text.size()) {
    size_t eol = text.find('\n', pos);
    std::string line =
        text.substr(pos, eol == std::string::npos ? std::string::npos : eol - pos);
    size_t start = line.find_first_not_of(" \t");
    if (start != std::string::npos && line.compare(start, 5, "prop:") == 0) {
      result.propLines.push_back(line.substr(start + 5));
      rest += "\n";
    } else {
      rest += line;
      rest += "\n";
    }
    if (eol == std::string::npos) break;
    pos = eol + 1;
  }

  detail::Lexer lex(rest);
  detail::Parser parser(lex.run());
  result.program = parser.run();
  return result;
}

inline Program parseProgram(const std::string& text) { return parse(text).program; }

}  // namespace cpl

#endif
