#include "dope/lang/ast.h"

#include <algorithm>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include "dope/errors.h"

namespace dope::lang {

const char * role_name(Role r)
{
  switch (r) {
    case Role::Param: return "param";
    case Role::Input: return "input";
    case Role::Output: return "output";
    case Role::Local: return "var";
  }
  return "?";
}

bool is_boolean(Op op)
{
  switch (op) {
    case Op::True: case Op::False: case Op::Lt: case Op::Le: case Op::Gt:
    case Op::Ge: case Op::Eq: case Op::Ne: case Op::Not: case Op::And:
    case Op::Or: case Op::Implies: case Op::InRange: case Op::Unknown:
    case Op::Next: case Op::Globally: case Op::Finally: case Op::WeakUntil:
    case Op::Until:
      return true;
    default: return false;
  }
}

bool is_temporal(Op op)
{
  return op == Op::Next || op == Op::Globally || op == Op::Finally
         || op == Op::WeakUntil || op == Op::Until;
}

namespace {

std::shared_ptr<Expr> node(Op op)
{
  auto e = std::make_shared<Expr>();
  e->op = op;
  return e;
}

}  // namespace

ExprP num(Value v)
{
  auto e = node(Op::Num);
  e->num = v;
  return e;
}

ExprP var(const std::string & name, int slot)
{
  auto e = node(Op::Var);
  e->name = name;
  e->slot = slot;
  return e;
}

ExprP sym(const std::string & name)
{
  auto e = node(Op::Sym);
  e->name = name;
  return e;
}

ExprP unknown() { return node(Op::Unknown); }

ExprP truth(bool b) { return node(b ? Op::True : Op::False); }

ExprP unary(Op op, ExprP a)
{
  auto e = node(op);
  e->args = {std::move(a)};
  return e;
}

ExprP binary(Op op, ExprP a, ExprP b)
{
  auto e = node(op);
  e->args = {std::move(a), std::move(b)};
  return e;
}

ExprP power(ExprP base, unsigned exp)
{
  auto e = node(Op::Pow);
  e->args = {std::move(base)};
  e->num = Value::integer(exp);
  return e;
}

ExprP in_range(ExprP x, ExprP lo, bool lo_open, ExprP hi, bool hi_open)
{
  auto e = node(Op::InRange);
  e->args = {std::move(x), std::move(lo), std::move(hi)};
  e->lo_open = lo_open;
  e->hi_open = hi_open;
  return e;
}

ExprP snap(ExprP x, std::shared_ptr<const Domain> d, const std::string & label)
{
  auto e = node(Op::Snap);
  e->args = {std::move(x)};
  e->domain = std::move(d);
  e->name = label;
  return e;
}

ExprP dist(std::shared_ptr<const Distance> d, const std::string & label,
           std::vector<ExprP> a, std::vector<ExprP> b)
{
  auto e = node(Op::Dist);
  e->dist = std::move(d);
  e->name = label;
  e->args = std::move(a);
  e->args.insert(e->args.end(), b.begin(), b.end());
  return e;
}

ExprP bound(std::shared_ptr<const BoundFn> f, const std::string & label,
            ExprP x)
{
  auto e = node(Op::Bound);
  e->bound = std::move(f);
  e->name = label;
  e->args = {std::move(x)};
  return e;
}

ExprP conj(std::vector<ExprP> items)
{
  ExprP acc;
  for (auto & it : items) {
    if (it->op == Op::True) continue;
    acc = acc ? binary(Op::And, acc, it) : it;
  }
  return acc ? acc : truth(true);
}

ExprP disj(std::vector<ExprP> items)
{
  ExprP acc;
  for (auto & it : items) {
    if (it->op == Op::False) continue;
    acc = acc ? binary(Op::Or, acc, it) : it;
  }
  return acc ? acc : truth(false);
}

ExprP implies(ExprP a, ExprP b) { return binary(Op::Implies, a, b); }

ExprP negate(ExprP a) { return unary(Op::Not, a); }

bool equal(const Expr & a, const Expr & b)
{
  if (a.op != b.op || a.args.size() != b.args.size()) return false;
  switch (a.op) {
    case Op::Num: if (a.num != b.num) return false; break;
    case Op::Pow: if (a.num != b.num) return false; break;
    case Op::Var: case Op::Sym: if (a.name != b.name) return false; break;
    case Op::InRange:
      if (a.lo_open != b.lo_open || a.hi_open != b.hi_open) return false;
      break;
    case Op::Snap:
      if (a.name != b.name || !(*a.domain == *b.domain)) return false;
      break;
    case Op::Dist: if (a.name != b.name || !(*a.dist == *b.dist)) return false; break;
    case Op::Bound: if (a.name != b.name || !(*a.bound == *b.bound)) return false; break;
    default: break;
  }
  for (size_t i = 0; i < a.args.size(); ++i)
    if (!equal(*a.args[i], *b.args[i])) return false;
  return true;
}

namespace {

// higher binds tighter
int prec(const Expr & e)
{
  switch (e.op) {
    case Op::Implies: return 1;
    case Op::WeakUntil: case Op::Until: return 2;
    case Op::Or: return 3;
    case Op::And: return 4;
    case Op::Not: case Op::Next: case Op::Globally: case Op::Finally: return 5;
    case Op::Lt: case Op::Le: case Op::Gt: case Op::Ge: case Op::Eq:
    case Op::Ne: case Op::InRange:
      return 6;
    case Op::Add: case Op::Sub: return 7;
    case Op::Mul: case Op::Div: return 8;
    case Op::Neg: return 9;
    case Op::Num: return e.num < Value() ? 9 : 11;
    case Op::Pow: return 10;
    default: return 11;
  }
}

const char * infix(Op op)
{
  switch (op) {
    case Op::Add: return " + ";
    case Op::Sub: return " - ";
    case Op::Mul: return " * ";
    case Op::Div: return " / ";
    case Op::Lt: return " < ";
    case Op::Le: return " <= ";
    case Op::Gt: return " > ";
    case Op::Ge: return " >= ";
    case Op::Eq: return " == ";
    case Op::Ne: return " != ";
    case Op::And: return " && ";
    case Op::Or: return " || ";
    case Op::Implies: return " => ";
    case Op::WeakUntil: return " W ";
    case Op::Until: return " U ";
    default: return " ? ";
  }
}

std::string wrap(const Expr & e, int min_prec)
{
  std::string s = to_string(e);
  return prec(e) < min_prec ? "(" + s + ")" : s;
}

std::string tuple(const std::vector<ExprP> & xs, size_t from, size_t to)
{
  if (to - from == 1) return to_string(*xs[from]);
  std::string s = "(";
  for (size_t i = from; i < to; ++i) s += (i > from ? ", " : "") + to_string(*xs[i]);
  return s + ")";
}

}  // namespace

std::string to_string(const Expr & e)
{
  int p = prec(e);
  switch (e.op) {
    case Op::Num: return e.num.str();
    case Op::Var: case Op::Sym: return e.name;
    case Op::True: return "true";
    case Op::False: return "false";
    case Op::Unknown: return "unknown";
    case Op::Neg: return "-" + wrap(*e.args[0], p);
    case Op::Not: return "!" + wrap(*e.args[0], p);
    case Op::Next: return "X(" + to_string(*e.args[0]) + ")";
    case Op::Globally: return "G(" + to_string(*e.args[0]) + ")";
    case Op::Finally: return "F(" + to_string(*e.args[0]) + ")";
    case Op::Abs: return "abs(" + to_string(*e.args[0]) + ")";
    case Op::Pow: return wrap(*e.args[0], p + 1) + "^" + e.num.str();
    case Op::InRange:
      return wrap(*e.args[0], p + 1) + " in " + (e.lo_open ? "(" : "[")
             + to_string(*e.args[1]) + ", " + to_string(*e.args[2])
             + (e.hi_open ? ")" : "]");
    case Op::Snap: return "snap_" + e.name + "(" + to_string(*e.args[0]) + ")";
    case Op::Bound: return e.name + "(" + to_string(*e.args[0]) + ")";
    case Op::Dist: {
      size_t n = e.args.size() / 2;
      return e.name + "(" + tuple(e.args, 0, n) + ", "
             + tuple(e.args, n, e.args.size()) + ")";
    }
    case Op::Implies: case Op::WeakUntil: case Op::Until:
      // right associative
      return wrap(*e.args[0], p + 1) + infix(e.op) + wrap(*e.args[1], p);
    case Op::Lt: case Op::Le: case Op::Gt: case Op::Ge: case Op::Eq:
    case Op::Ne:
      return wrap(*e.args[0], p + 1) + infix(e.op) + wrap(*e.args[1], p + 1);
    default:
      // left associative
      return wrap(*e.args[0], p) + infix(e.op) + wrap(*e.args[1], p + 1);
  }
}

std::vector<std::string> free_vars(const Expr & e)
{
  std::set<std::string> acc;
  std::unordered_set<const Expr *> seen;
  std::vector<const Expr *> stack{&e};
  while (!stack.empty()) {
    const Expr * x = stack.back();
    stack.pop_back();
    if (!seen.insert(x).second) continue;
    if (x->op == Op::Var) acc.insert(x->name);
    for (auto & a : x->args) stack.push_back(a.get());
  }
  return {acc.begin(), acc.end()};
}

namespace {

// Rebuilds e bottom-up through `leaf`, visiting each shared node once so
// that DAG-shaped predicates (as produced by wp) stay DAG-shaped.
template <class Leaf>
ExprP rebuild(const ExprP & e, const Leaf & leaf,
              std::unordered_map<const Expr *, ExprP> & memo)
{
  if (auto it = memo.find(e.get()); it != memo.end()) return it->second;
  ExprP out;
  if (e->op == Op::Var) {
    out = leaf(e);
  } else if (e->args.empty()) {
    out = e;
  } else {
    std::vector<ExprP> args;
    bool changed = false;
    for (auto & a : e->args) {
      args.push_back(rebuild(a, leaf, memo));
      changed |= args.back() != a;
    }
    if (!changed) {
      out = e;
    } else {
      auto copy = std::make_shared<Expr>(*e);
      copy->args = std::move(args);
      out = copy;
    }
  }
  memo.emplace(e.get(), out);
  return out;
}

}  // namespace

ExprP substitute(const ExprP & e, const std::map<std::string, ExprP> & subst)
{
  std::unordered_map<const Expr *, ExprP> memo;
  return rebuild(e, [&](const ExprP & v) {
    auto it = subst.find(v->name);
    return it == subst.end() ? v : it->second;
  }, memo);
}

namespace {

bool constant(const Expr & e) { return e.op == Op::Num || e.op == Op::True || e.op == Op::False; }

bool boolean_op(Op op)
{
  switch (op) {
    case Op::Not: case Op::And: case Op::Or: case Op::Implies: case Op::Lt: case Op::Le:
    case Op::Gt: case Op::Ge: case Op::Eq: case Op::Ne: case Op::InRange:
      return true;
    default: return false;
  }
}

bool foldable(Op op)
{
  switch (op) {
    case Op::Add: case Op::Sub: case Op::Mul: case Op::Div: case Op::Neg: case Op::Pow:
    case Op::Abs: case Op::Snap: case Op::Dist: case Op::Bound:
      return true;
    default: return boolean_op(op);
  }
}

// one node whose arguments are already folded; Kleene rules for the
// connectives so that unknown operands stay sound
ExprP fold_node(const ExprP & e)
{
  auto is = [](const ExprP & a, Op op) { return a->op == op; };
  switch (e->op) {
    case Op::Not:
      if (is(e->args[0], Op::True)) return truth(false);
      if (is(e->args[0], Op::False)) return truth(true);
      return e;
    case Op::And:
      if (is(e->args[0], Op::False) || is(e->args[1], Op::False)) return truth(false);
      if (is(e->args[0], Op::True)) return e->args[1];
      if (is(e->args[1], Op::True)) return e->args[0];
      return e;
    case Op::Or:
      if (is(e->args[0], Op::True) || is(e->args[1], Op::True)) return truth(true);
      if (is(e->args[0], Op::False)) return e->args[1];
      if (is(e->args[1], Op::False)) return e->args[0];
      return e;
    case Op::Implies:
      if (is(e->args[0], Op::False) || is(e->args[1], Op::True)) return truth(true);
      if (is(e->args[0], Op::True)) return e->args[1];
      return e;
    default: break;
  }
  if (!foldable(e->op)) return e;
  for (auto & a : e->args)
    if (!constant(*a)) return e;
  try {
    Env env;
    if (boolean_op(e->op)) return truth(eval_bool(*e, env));
    return num(eval_num(*e, env));
  } catch (const EvalError &) {
    return e;  // e.g. division by zero stays for the checker to report
  }
}

}  // namespace

ExprP substitute_folded(const ExprP & e, const std::map<std::string, ExprP> & subst)
{
  std::unordered_map<const Expr *, ExprP> memo;
  std::function<ExprP(const ExprP &)> go = [&](const ExprP & x) -> ExprP {
    if (auto it = memo.find(x.get()); it != memo.end()) return it->second;
    ExprP out;
    if (x->op == Op::Var) {
      auto it = subst.find(x->name);
      out = it == subst.end() ? x : it->second;
    } else if (x->args.empty()) {
      out = x;
    } else {
      std::vector<ExprP> args;
      bool changed = false;
      for (auto & a : x->args) {
        args.push_back(go(a));
        changed |= args.back() != a;
      }
      if (changed) {
        auto copy = std::make_shared<Expr>(*x);
        copy->args = std::move(args);
        out = fold_node(copy);
      } else {
        out = x;
      }
    }
    memo.emplace(x.get(), out);
    return out;
  };
  return go(e);
}

ExprP resolve(const ExprP & e,
              const std::function<int(const std::string &)> & slot_of)
{
  std::unordered_map<const Expr *, ExprP> memo;
  return rebuild(e, [&](const ExprP & v) -> ExprP {
    int s = slot_of(v->name);
    if (s == v->slot) return v;
    auto copy = std::make_shared<Expr>(*v);
    copy->slot = s;
    return copy;
  }, memo);
}

Value eval_num(const Expr & e, const Env & env)
{
  switch (e.op) {
    case Op::Num: return e.num;
    case Op::Var:
      if (e.slot >= 0 && env.slots) return env.slots[e.slot];
      if (env.symbols) {
        auto it = env.symbols->find(e.name);
        if (it != env.symbols->end()) return it->second;
      }
      throw EvalError("unbound variable '" + e.name + "'");
    case Op::Sym: {
      if (env.symbols) {
        auto it = env.symbols->find(e.name);
        if (it != env.symbols->end()) return it->second;
      }
      throw EvalError("unbound symbol '" + e.name + "'");
    }
    case Op::Neg: return -eval_num(*e.args[0], env);
    case Op::Add: return eval_num(*e.args[0], env) + eval_num(*e.args[1], env);
    case Op::Sub: return eval_num(*e.args[0], env) - eval_num(*e.args[1], env);
    case Op::Mul: return eval_num(*e.args[0], env) * eval_num(*e.args[1], env);
    case Op::Div: {
      Value d = eval_num(*e.args[1], env);
      if (d == Value()) throw EvalError("division by zero in " + to_string(e));
      return eval_num(*e.args[0], env) / d;
    }
    case Op::Pow:
      return eval_num(*e.args[0], env)
          .pow(static_cast<unsigned>(e.num.mantissa() / Value::kScale));
    case Op::Abs: return eval_num(*e.args[0], env).abs();
    case Op::Snap: return e.domain->snap(eval_num(*e.args[0], env));
    case Op::Bound: return (*e.bound)(eval_num(*e.args[0], env));
    case Op::Dist: {
      size_t n = e.args.size() / 2;
      Valuation a(n), b(n);
      for (size_t i = 0; i < n; ++i) {
        a[i] = eval_num(*e.args[i], env);
        b[i] = eval_num(*e.args[n + i], env);
      }
      return (*e.dist)(a, b);
    }
    default:
      throw EvalError("boolean expression used as a number: " + to_string(e));
  }
}

bool eval_bool(const Expr & e, const Env & env)
{
  switch (e.op) {
    case Op::True: return true;
    case Op::False: return false;
    case Op::Lt: return eval_num(*e.args[0], env) < eval_num(*e.args[1], env);
    case Op::Le: return eval_num(*e.args[0], env) <= eval_num(*e.args[1], env);
    case Op::Gt: return eval_num(*e.args[0], env) > eval_num(*e.args[1], env);
    case Op::Ge: return eval_num(*e.args[0], env) >= eval_num(*e.args[1], env);
    case Op::Eq: return eval_num(*e.args[0], env) == eval_num(*e.args[1], env);
    case Op::Ne: return eval_num(*e.args[0], env) != eval_num(*e.args[1], env);
    case Op::Not: return !eval_bool(*e.args[0], env);
    case Op::And: return eval_bool(*e.args[0], env) && eval_bool(*e.args[1], env);
    case Op::Or: return eval_bool(*e.args[0], env) || eval_bool(*e.args[1], env);
    case Op::Implies:
      return !eval_bool(*e.args[0], env) || eval_bool(*e.args[1], env);
    case Op::InRange: {
      Value x = eval_num(*e.args[0], env);
      Value lo = eval_num(*e.args[1], env);
      Value hi = eval_num(*e.args[2], env);
      bool above = e.lo_open ? x > lo : x >= lo;
      bool below = e.hi_open ? x < hi : x <= hi;
      return above && below;
    }
    case Op::Unknown: throw EvalError("unknown truth value");
    default:
      if (is_temporal(e.op))
        throw EvalError("temporal operator in a state predicate: " + to_string(e));
      throw EvalError("number used as a condition: " + to_string(e));
  }
}

// statements

namespace {

std::shared_ptr<Stmt> snode(StmtKind k)
{
  auto s = std::make_shared<Stmt>();
  s->kind = k;
  return s;
}

}  // namespace

StmtP skip() { return snode(StmtKind::Skip); }

StmtP assign(const std::string & x, ExprP e, int slot)
{
  auto s = snode(StmtKind::Assign);
  s->var = x;
  s->e = std::move(e);
  s->slot = slot;
  return s;
}

StmtP nondet(const std::string & x, ExprP lo, ExprP hi, int slot)
{
  auto s = snode(StmtKind::Nondet);
  s->var = x;
  s->lo = std::move(lo);
  s->hi = std::move(hi);
  s->slot = slot;
  return s;
}

StmtP seq(std::vector<StmtP> items)
{
  std::vector<StmtP> flat;
  for (auto & it : items) {
    if (it->kind == StmtKind::Seq)
      flat.insert(flat.end(), it->items.begin(), it->items.end());
    else
      flat.push_back(it);
  }
  if (flat.empty()) return skip();
  if (flat.size() == 1) return flat[0];
  auto s = snode(StmtKind::Seq);
  s->items = std::move(flat);
  return s;
}

StmtP if_(ExprP c, StmtP t, StmtP e)
{
  auto s = snode(StmtKind::If);
  s->e = std::move(c);
  s->then_s = std::move(t);
  s->else_s = e ? std::move(e) : skip();
  return s;
}

StmtP while_(ExprP c, StmtP body)
{
  auto s = snode(StmtKind::While);
  s->e = std::move(c);
  s->body = std::move(body);
  return s;
}

bool equal(const Stmt & a, const Stmt & b)
{
  if (a.kind != b.kind) return false;
  switch (a.kind) {
    case StmtKind::Skip: return true;
    case StmtKind::Assign: return a.var == b.var && equal(*a.e, *b.e);
    case StmtKind::Nondet:
      return a.var == b.var && equal(*a.lo, *b.lo) && equal(*a.hi, *b.hi);
    case StmtKind::Seq:
      if (a.items.size() != b.items.size()) return false;
      for (size_t i = 0; i < a.items.size(); ++i)
        if (!equal(*a.items[i], *b.items[i])) return false;
      return true;
    case StmtKind::If:
      return equal(*a.e, *b.e) && equal(*a.then_s, *b.then_s)
             && equal(*a.else_s, *b.else_s);
    case StmtKind::While: return equal(*a.e, *b.e) && equal(*a.body, *b.body);
  }
  return false;
}

bool deterministic(const Stmt & s)
{
  switch (s.kind) {
    case StmtKind::Nondet: return false;
    case StmtKind::Seq:
      return std::all_of(s.items.begin(), s.items.end(),
                         [](auto & x) { return deterministic(*x); });
    case StmtKind::If: return deterministic(*s.then_s) && deterministic(*s.else_s);
    case StmtKind::While: return deterministic(*s.body);
    default: return true;
  }
}

bool loop_free(const Stmt & s)
{
  switch (s.kind) {
    case StmtKind::While: return false;
    case StmtKind::Seq:
      return std::all_of(s.items.begin(), s.items.end(),
                         [](auto & x) { return loop_free(*x); });
    case StmtKind::If: return loop_free(*s.then_s) && loop_free(*s.else_s);
    default: return true;
  }
}

int Program::find(const std::string & name) const
{
  for (size_t i = 0; i < decls.size(); ++i)
    if (decls[i].name == name) return static_cast<int>(i);
  return -1;
}

std::vector<size_t> Program::of_role(Role r) const
{
  std::vector<size_t> out;
  for (size_t i = 0; i < decls.size(); ++i)
    if (decls[i].role == r) out.push_back(i);
  return out;
}

Value Program::initial(size_t slot) const
{
  const Decl & d = decls[slot];
  return d.domain.snap(d.has_init ? d.init : Value());
}

bool equal(const Program & a, const Program & b)
{
  if (a.decls.size() != b.decls.size() || a.consts != b.consts) return false;
  for (size_t i = 0; i < a.decls.size(); ++i) {
    const Decl & x = a.decls[i];
    const Decl & y = b.decls[i];
    if (x.name != y.name || x.role != y.role || !(x.domain == y.domain)
        || x.has_init != y.has_init || (x.has_init && x.init != y.init))
      return false;
  }
  return equal(*a.body, *b.body);
}

}  // namespace dope::lang
