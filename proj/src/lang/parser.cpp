#include "dope/lang/parser.h"

#include <cctype>
#include <fstream>
#include <set>
#include <sstream>

#include "dope/errors.h"

namespace dope::lang {

namespace {

enum class Tok { Ident, Number, Punct, End };

struct Token
{
  Tok kind = Tok::End;
  std::string text;
  Pos pos;
};

const std::set<std::string> kKeywords = {
    "param", "input", "output", "var",  "const", "in",    "step",
    "if",    "else",  "while",  "skip", "true",  "false", "abs", "inf"};

std::vector<Token> lex(std::string_view src)
{
  std::vector<Token> out;
  int line = 1, col = 1;
  size_t i = 0;
  auto adv = [&](size_t n) {
    for (size_t k = 0; k < n; ++k, ++i) {
      if (src[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
  };
  static const char * puncts[] = {":=", ":in", "<=", ">=", "==", "!=", "&&",
                                  "||", "=>",  "(",  ")",  "[",  "]",  "{",
                                  "}",  ",",   ";",  "+",  "-",  "*",  "/",
                                  "^",  "<",   ">",  "!",  "="};
  while (i < src.size()) {
    char c = src[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      adv(1);
      continue;
    }
    if (c == '#' || (c == '/' && i + 1 < src.size() && src[i + 1] == '/')) {
      while (i < src.size() && src[i] != '\n') adv(1);
      continue;
    }
    Token t;
    t.pos = {line, col};
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      size_t j = i;
      while (j < src.size()
             && (std::isalnum(static_cast<unsigned char>(src[j])) || src[j] == '_'))
        ++j;
      while (j < src.size() && src[j] == '\'') ++j;
      t.kind = Tok::Ident;
      t.text = std::string(src.substr(i, j - i));
      adv(j - i);
    } else if (std::isdigit(static_cast<unsigned char>(c))
               || (c == '.' && i + 1 < src.size()
                   && std::isdigit(static_cast<unsigned char>(src[i + 1])))) {
      size_t j = i;
      while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
      if (j < src.size() && src[j] == '.') {
        ++j;
        while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
      }
      t.kind = Tok::Number;
      t.text = std::string(src.substr(i, j - i));
      adv(j - i);
    } else {
      bool found = false;
      for (const char * p : puncts) {
        std::string_view pv(p);
        if (src.substr(i, pv.size()) == pv) {
          // ":in" must not swallow the start of an identifier
          if (pv == ":in" && i + 3 < src.size()
              && (std::isalnum(static_cast<unsigned char>(src[i + 3])) || src[i + 3] == '_'))
            continue;
          t.kind = Tok::Punct;
          t.text = std::string(pv);
          adv(pv.size());
          found = true;
          break;
        }
      }
      if (!found)
        throw ParseError(line, col, std::string("unexpected character '") + c + "'");
    }
    out.push_back(std::move(t));
  }
  Token end;
  end.pos = {line, col};
  out.push_back(end);
  return out;
}

class Parser
{
 public:
  Parser(std::string_view src, NameResolver names, bool temporal)
      : toks_(lex(src)), names_(std::move(names)), temporal_(temporal)
  {
  }

  Program program();
  ExprP formula()
  {
    ExprP e = expr();
    expect_end();
    return e;
  }
  Domain whole_domain()
  {
    Domain d = domain();
    expect_end();
    return d;
  }

 private:
  const Token & peek(size_t k = 0) const
  {
    return toks_[std::min(pos_ + k, toks_.size() - 1)];
  }
  bool is(const std::string & text, size_t k = 0) const
  {
    const Token & t = peek(k);
    return t.kind != Tok::End && t.kind != Tok::Number && t.text == text;
  }
  bool accept(const std::string & text)
  {
    if (!is(text)) return false;
    ++pos_;
    return true;
  }
  [[noreturn]] void fail(const Token & t, const std::string & msg) const
  {
    throw ParseError(t.pos.line, t.pos.col, msg);
  }
  std::string describe(const Token & t) const
  {
    return t.kind == Tok::End ? "end of input" : "'" + t.text + "'";
  }
  const Token & expect(const std::string & text)
  {
    if (!is(text)) fail(peek(), "expected '" + text + "', found " + describe(peek()));
    return toks_[pos_++];
  }
  void expect_end()
  {
    if (peek().kind != Tok::End) fail(peek(), "unexpected " + describe(peek()));
  }
  bool is_temporal_kw(const char * k) const
  {
    return temporal_ && peek().kind == Tok::Ident && peek().text == k;
  }
  std::string ident()
  {
    const Token & t = peek();
    if (t.kind != Tok::Ident || kKeywords.count(t.text))
      fail(t, "expected an identifier, found " + describe(t));
    ++pos_;
    return t.text;
  }

  Value number();
  Value signed_number();
  Domain domain();
  void decl(Program & p);
  StmtP stmts(const Program & p, const std::string & closer);
  StmtP stmt(const Program & p);
  StmtP block(const Program & p);

  ExprP expr() { return implication(); }
  ExprP implication();
  ExprP until();
  ExprP disjunction();
  ExprP conjunction();
  ExprP negation();
  ExprP comparison();
  ExprP additive();
  ExprP multiplicative();
  ExprP unary_minus();
  ExprP pow_expr();
  ExprP primary();

  ExprP need_num(ExprP e, const Pos & at) const
  {
    if (is_boolean(e->op)) throw ParseError(at.line, at.col, "expected a number, found a condition");
    return e;
  }
  ExprP need_bool(ExprP e, const Pos & at) const
  {
    if (!is_boolean(e->op)) throw ParseError(at.line, at.col, "expected a condition, found a number");
    return e;
  }
  ExprP at(ExprP e, const Pos & p) const
  {
    auto copy = std::make_shared<Expr>(*e);
    copy->pos = p;
    return copy;
  }

  std::vector<Token> toks_;
  size_t pos_ = 0;
  NameResolver names_;
  bool temporal_;
  std::map<std::string, Value> consts_;
};

Value Parser::number()
{
  const Token & t = peek();
  if (t.kind == Tok::Number) {
    ++pos_;
    try {
      return Value::parse(t.text);
    } catch (const DataError & e) {
      fail(t, e.what());
    }
  }
  if (is("inf")) {
    ++pos_;
    return Value::infinity();
  }
  if (t.kind == Tok::Ident && consts_.count(t.text)) {
    ++pos_;
    return consts_.at(t.text);
  }
  fail(t, "expected a number, found " + describe(t));
}

Value Parser::signed_number()
{
  if (accept("-")) return -number();
  return number();
}

Domain Parser::domain()
{
  const Token & start = peek();
  try {
    if (accept("{")) {
      std::vector<Value> vs{signed_number()};
      while (accept(",")) vs.push_back(signed_number());
      expect("}");
      return Domain::set(std::move(vs));
    }
    bool lo_open;
    if (accept("(")) {
      lo_open = true;
    } else {
      expect("[");
      lo_open = false;
    }
    Value lo = signed_number();
    expect(",");
    Value hi = signed_number();
    bool hi_open;
    if (accept(")")) {
      hi_open = true;
    } else {
      expect("]");
      hi_open = false;
    }
    expect("step");
    Value step = number();
    return Domain::interval(lo, lo_open, hi, hi_open, step);
  } catch (const ParseError &) {
    throw;
  } catch (const DataError & e) {
    fail(start, e.what());
  }
}

void Parser::decl(Program & p)
{
  const Token & kw = peek();
  ++pos_;
  if (kw.text == "const") {
    const Token & nt = peek();
    std::string name = ident();
    if (consts_.count(name) || p.find(name) >= 0)
      throw SemanticError(name, "duplicate declaration of '" + name + "'");
    expect("=");
    Value v = signed_number();
    consts_[name] = v;
    p.consts.emplace_back(name, v);
    (void)nt;
    expect(";");
    return;
  }
  Decl d;
  d.pos = kw.pos;
  d.role = kw.text == "param"    ? Role::Param
           : kw.text == "input"  ? Role::Input
           : kw.text == "output" ? Role::Output
                                 : Role::Local;
  d.name = ident();
  if (p.find(d.name) >= 0 || consts_.count(d.name))
    throw SemanticError(d.name, "duplicate declaration of '" + d.name + "'");
  if (accept("in")) d.domain = domain();
  if (is("=")) {
    const Token & eq = peek();
    ++pos_;
    if (d.role == Role::Param || d.role == Role::Input)
      throw SemanticError(d.name, std::to_string(eq.pos.line) + ":"
                                      + std::to_string(eq.pos.col) + ": "
                                      + role_name(d.role) + " '" + d.name
                                      + "' cannot have an initial value");
    d.has_init = true;
    d.init = signed_number();
  }
  expect(";");
  p.decls.push_back(std::move(d));
}

Program Parser::program()
{
  Program p;
  while (is("param") || is("input") || is("output") || is("var") || is("const"))
    decl(p);
  names_ = [&p](const std::string & n) { return p.find(n); };
  p.body = stmts(p, "");
  expect_end();
  return p;
}

StmtP Parser::stmts(const Program & p, const std::string & closer)
{
  std::vector<StmtP> items;
  auto at_close = [&] {
    return closer.empty() ? peek().kind == Tok::End : is(closer);
  };
  if (at_close()) return skip();
  items.push_back(stmt(p));
  while (accept(";")) {
    if (at_close()) break;
    items.push_back(stmt(p));
  }
  return seq(std::move(items));
}

StmtP Parser::block(const Program & p)
{
  expect("{");
  StmtP s = stmts(p, "}");
  expect("}");
  return s;
}

StmtP Parser::stmt(const Program & p)
{
  const Token & t = peek();
  Pos at_pos = t.pos;
  StmtP out;
  if (accept("skip")) {
    out = skip();
  } else if (accept("if")) {
    ExprP c = need_bool(expr(), at_pos);
    StmtP th = block(p);
    StmtP el;
    if (accept("else")) el = is("if") ? stmt(p) : block(p);
    out = if_(c, th, el);
  } else if (accept("while")) {
    ExprP c = need_bool(expr(), at_pos);
    out = while_(c, block(p));
  } else if (t.kind == Tok::Ident && !kKeywords.count(t.text)) {
    std::string x = ident();
    int slot = p.find(x);
    if (slot < 0) {
      if (consts_.count(x)) throw SemanticError(x, "cannot assign to constant '" + x + "'");
      throw SemanticError(x, std::to_string(at_pos.line) + ":"
                                 + std::to_string(at_pos.col)
                                 + ": undeclared variable '" + x + "'");
    }
    const Decl & d = p.decls[slot];
    if (d.role == Role::Param || d.role == Role::Input)
      throw SemanticError(x, std::to_string(at_pos.line) + ":"
                                 + std::to_string(at_pos.col)
                                 + ": cannot assign to " + role_name(d.role)
                                 + " '" + x + "'");
    if (accept(":=")) {
      Pos ep = peek().pos;
      out = assign(x, need_num(expr(), ep), slot);
    } else if (accept(":in")) {
      if (d.domain.exact())
        throw SemanticError(x, "nondeterministic assignment to '" + x
                                   + "' needs a declared grid");
      expect("[");
      Pos lp = peek().pos;
      ExprP lo = need_num(expr(), lp);
      expect(",");
      Pos hp = peek().pos;
      ExprP hi = need_num(expr(), hp);
      expect("]");
      out = nondet(x, lo, hi, slot);
    } else {
      fail(peek(), "expected ':=' or ':in', found " + describe(peek()));
    }
  } else {
    fail(t, "expected a statement, found " + describe(t));
  }
  auto copy = std::make_shared<Stmt>(*out);
  copy->pos = at_pos;
  return copy;
}

ExprP Parser::implication()
{
  Pos p = peek().pos;
  ExprP lhs = until();
  if (accept("=>")) {
    Pos q = peek().pos;
    ExprP rhs = implication();
    return at(binary(Op::Implies, need_bool(lhs, p), need_bool(rhs, q)), p);
  }
  return lhs;
}

ExprP Parser::until()
{
  Pos p = peek().pos;
  ExprP lhs = disjunction();
  if (is_temporal_kw("W") || is_temporal_kw("U")) {
    Op op = peek().text == "W" ? Op::WeakUntil : Op::Until;
    ++pos_;
    Pos q = peek().pos;
    ExprP rhs = until();
    return at(binary(op, need_bool(lhs, p), need_bool(rhs, q)), p);
  }
  return lhs;
}

ExprP Parser::disjunction()
{
  Pos p = peek().pos;
  ExprP lhs = conjunction();
  while (accept("||")) {
    Pos q = peek().pos;
    lhs = at(binary(Op::Or, need_bool(lhs, p), need_bool(conjunction(), q)), p);
  }
  return lhs;
}

ExprP Parser::conjunction()
{
  Pos p = peek().pos;
  ExprP lhs = negation();
  while (accept("&&")) {
    Pos q = peek().pos;
    lhs = at(binary(Op::And, need_bool(lhs, p), need_bool(negation(), q)), p);
  }
  return lhs;
}

ExprP Parser::negation()
{
  Pos p = peek().pos;
  if (accept("!")) return at(unary(Op::Not, need_bool(negation(), p)), p);
  for (auto [kw, op] : {std::pair{"G", Op::Globally}, std::pair{"X", Op::Next},
                        std::pair{"F", Op::Finally}}) {
    // in temporal mode G, X, F, W and U are reserved
    if (is_temporal_kw(kw)) {
      ++pos_;
      return at(unary(op, need_bool(negation(), p)), p);
    }
  }
  return comparison();
}

ExprP Parser::comparison()
{
  Pos p = peek().pos;
  ExprP lhs = additive();
  static const std::pair<const char *, Op> ops[] = {
      {"<=", Op::Le}, {">=", Op::Ge}, {"<", Op::Lt},
      {">", Op::Gt},  {"==", Op::Eq}, {"!=", Op::Ne}};
  for (auto [text, op] : ops) {
    if (accept(text)) {
      Pos q = peek().pos;
      ExprP rhs = additive();
      return at(binary(op, need_num(lhs, p), need_num(rhs, q)), p);
    }
  }
  if (accept("in")) {
    need_num(lhs, p);
    bool lo_open;
    if (accept("(")) {
      lo_open = true;
    } else {
      expect("[");
      lo_open = false;
    }
    Pos lp = peek().pos;
    ExprP lo = need_num(expr(), lp);
    expect(",");
    Pos hp = peek().pos;
    ExprP hi = need_num(expr(), hp);
    bool hi_open;
    if (accept(")")) {
      hi_open = true;
    } else {
      expect("]");
      hi_open = false;
    }
    return at(in_range(lhs, lo, lo_open, hi, hi_open), p);
  }
  return lhs;
}

ExprP Parser::additive()
{
  Pos p = peek().pos;
  ExprP lhs = multiplicative();
  while (is("+") || is("-")) {
    Op op = peek().text == "+" ? Op::Add : Op::Sub;
    ++pos_;
    Pos q = peek().pos;
    lhs = at(binary(op, need_num(lhs, p), need_num(multiplicative(), q)), p);
  }
  return lhs;
}

ExprP Parser::multiplicative()
{
  Pos p = peek().pos;
  ExprP lhs = unary_minus();
  while (is("*") || is("/")) {
    Op op = peek().text == "*" ? Op::Mul : Op::Div;
    ++pos_;
    Pos q = peek().pos;
    lhs = at(binary(op, need_num(lhs, p), need_num(unary_minus(), q)), p);
  }
  return lhs;
}

ExprP Parser::unary_minus()
{
  Pos p = peek().pos;
  if (accept("-")) {
    ExprP e = need_num(unary_minus(), p);
    // fold literals so that printed negative numbers read back unchanged
    if (e->op == Op::Num && !e->num.is_inf()) return at(num(-e->num), p);
    return at(unary(Op::Neg, e), p);
  }
  return pow_expr();
}

ExprP Parser::pow_expr()
{
  Pos p = peek().pos;
  ExprP base = primary();
  if (accept("^")) {
    const Token & t = peek();
    if (t.kind != Tok::Number || t.text.find('.') != std::string::npos)
      fail(t, "exponent must be a nonnegative integer literal");
    ++pos_;
    unsigned long n = std::stoul(t.text);
    if (n > 64) fail(t, "exponent too large");
    return at(power(need_num(base, p), static_cast<unsigned>(n)), p);
  }
  return base;
}

ExprP Parser::primary()
{
  const Token & t = peek();
  Pos p = t.pos;
  if (t.kind == Tok::Number || is("inf")) return at(num(number()), p);
  if (accept("true")) return at(truth(true), p);
  if (accept("false")) return at(truth(false), p);
  if (accept("abs")) {
    expect("(");
    Pos q = peek().pos;
    ExprP e = need_num(expr(), q);
    expect(")");
    return at(unary(Op::Abs, e), p);
  }
  if (accept("(")) {
    ExprP e = expr();
    expect(")");
    return e;
  }
  if (t.kind == Tok::Ident && !kKeywords.count(t.text)) {
    ++pos_;
    if (consts_.count(t.text)) return at(num(consts_.at(t.text)), p);
    int slot = names_ ? names_(t.text) : -1;
    if (slot < 0)
      throw SemanticError(t.text, std::to_string(p.line) + ":"
                                      + std::to_string(p.col)
                                      + ": undeclared variable '" + t.text + "'");
    return at(var(t.text, slot), p);
  }
  fail(t, "expected an expression, found " + describe(t));
}

}  // namespace

Program parse_program(std::string_view src)
{
  Parser ps(src, nullptr, false);
  return ps.program();
}

Program load_program(const std::string & path)
{
  std::ifstream in(path);
  if (!in) throw DataError("cannot open program file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_program(ss.str());
}

Domain parse_domain(std::string_view src)
{
  Parser ps(src, nullptr, false);
  return ps.whole_domain();
}

ExprP parse_expr(std::string_view src, const NameResolver & names, bool temporal)
{
  Parser ps(src, names, temporal);
  return ps.formula();
}

std::string to_string(const Stmt & s, int indent)
{
  std::string pad(indent, ' ');
  switch (s.kind) {
    case StmtKind::Skip: return pad + "skip";
    case StmtKind::Assign: return pad + s.var + " := " + to_string(*s.e);
    case StmtKind::Nondet:
      return pad + s.var + " :in [" + to_string(*s.lo) + ", " + to_string(*s.hi) + "]";
    case StmtKind::Seq: {
      std::string out;
      for (size_t i = 0; i < s.items.size(); ++i)
        out += to_string(*s.items[i], indent) + (i + 1 < s.items.size() ? ";\n" : "");
      return out;
    }
    case StmtKind::If: {
      std::string out = pad + "if " + to_string(*s.e) + " {\n"
                        + to_string(*s.then_s, indent + 2) + "\n" + pad + "}";
      if (s.else_s->kind != StmtKind::Skip) {
        if (s.else_s->kind == StmtKind::If)
          out += " else " + to_string(*s.else_s, indent).substr(indent);
        else
          out += " else {\n" + to_string(*s.else_s, indent + 2) + "\n" + pad + "}";
      }
      return out;
    }
    case StmtKind::While:
      return pad + "while " + to_string(*s.e) + " {\n"
             + to_string(*s.body, indent + 2) + "\n" + pad + "}";
  }
  return "";
}

std::string pretty_print(const Program & p)
{
  std::string out;
  for (auto & [name, v] : p.consts) out += "const " + name + " = " + v.str() + ";\n";
  for (auto & d : p.decls) {
    out += std::string(role_name(d.role)) + " " + d.name;
    if (!d.domain.exact()) out += " in " + d.domain.str();
    if (d.has_init) out += " = " + d.init.str();
    out += ";\n";
  }
  out += to_string(*p.body) + "\n";
  return out;
}

}  // namespace dope::lang
