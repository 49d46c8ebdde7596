#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "dope/distance.h"
#include "dope/domain.h"
#include "dope/value.h"

namespace dope::lang {

struct Pos
{
  int line = 0;
  int col = 0;
};

enum class Role { Param, Input, Output, Local };
const char * role_name(Role r);

enum class Op {
  Num, Var, Neg, Add, Sub, Mul, Div, Pow, Abs,
  True, False, Lt, Le, Gt, Ge, Eq, Ne, Not, And, Or, Implies, InRange,
  // temporal operators, only produced when parsing formulas
  Next, Globally, Finally, WeakUntil, Until,
  // predicate-only nodes built by the wp engine
  Snap, Dist, Bound, Sym, Unknown,
};

bool is_boolean(Op op);
bool is_temporal(Op op);

struct Expr;
using ExprP = std::shared_ptr<const Expr>;

struct Expr
{
  Op op = Op::Num;
  Value num;                  // Num literal, Pow exponent
  std::string name;           // Var and Sym name; label of Snap/Dist/Bound
  std::vector<ExprP> args;    // InRange: {x, lo, hi}; Dist: a..., b...
  bool lo_open = false;       // InRange
  bool hi_open = false;
  int slot = -1;              // resolved variable index, -1 if unresolved
  std::shared_ptr<const Domain> domain;  // Snap
  std::shared_ptr<const Distance> dist;  // Dist
  std::shared_ptr<const BoundFn> bound;  // Bound
  Pos pos;
};

// builders
ExprP num(Value v);
ExprP var(const std::string & name, int slot = -1);
ExprP sym(const std::string & name);
ExprP unknown();
ExprP truth(bool b);
ExprP unary(Op op, ExprP a);
ExprP binary(Op op, ExprP a, ExprP b);
ExprP power(ExprP base, unsigned exp);
ExprP in_range(ExprP x, ExprP lo, bool lo_open, ExprP hi, bool hi_open);
ExprP snap(ExprP e, std::shared_ptr<const Domain> d, const std::string & label);
ExprP dist(std::shared_ptr<const Distance> d, const std::string & label,
           std::vector<ExprP> a, std::vector<ExprP> b);
ExprP bound(std::shared_ptr<const BoundFn> f, const std::string & label,
            ExprP x);
ExprP conj(std::vector<ExprP> items);
ExprP disj(std::vector<ExprP> items);
ExprP implies(ExprP a, ExprP b);
ExprP negate(ExprP a);

bool equal(const Expr & a, const Expr & b);
std::string to_string(const Expr & e);

// variables occurring in e (names, without duplicates, sorted)
std::vector<std::string> free_vars(const Expr & e);

// e[r/x] for each (x, r) in subst, simultaneously
ExprP substitute(const ExprP & e, const std::map<std::string, ExprP> & subst);
// the same, folding constant subterms and trivial connectives on the way
ExprP substitute_folded(const ExprP & e, const std::map<std::string, ExprP> & subst);

// rebuild with Var slots resolved through slot_of (-1 keeps unresolved)
ExprP resolve(const ExprP & e,
              const std::function<int(const std::string &)> & slot_of);

struct Env
{
  const Value * slots = nullptr;
  const std::map<std::string, Value> * symbols = nullptr;
};

// two-valued evaluation; throws EvalError on division by zero, unresolved
// variables, Unknown nodes
Value eval_num(const Expr & e, const Env & env);
bool eval_bool(const Expr & e, const Env & env);

enum class StmtKind { Skip, Assign, Nondet, Seq, If, While };

struct Stmt;
using StmtP = std::shared_ptr<const Stmt>;

struct Stmt
{
  StmtKind kind = StmtKind::Skip;
  std::string var;   // Assign, Nondet
  int slot = -1;
  ExprP e;           // Assign value, If/While condition
  ExprP lo, hi;      // Nondet range
  std::vector<StmtP> items;  // Seq
  StmtP then_s, else_s;      // If
  StmtP body;                // While
  Pos pos;
};

StmtP skip();
StmtP assign(const std::string & x, ExprP e, int slot = -1);
StmtP nondet(const std::string & x, ExprP lo, ExprP hi, int slot = -1);
StmtP seq(std::vector<StmtP> items);  // flattens nested sequences
StmtP if_(ExprP c, StmtP t, StmtP e);
StmtP while_(ExprP c, StmtP body);

bool equal(const Stmt & a, const Stmt & b);
bool deterministic(const Stmt & s);
bool loop_free(const Stmt & s);

struct Decl
{
  std::string name;
  Role role = Role::Local;
  Domain domain;
  bool has_init = false;
  Value init;
  Pos pos;
};

struct Program
{
  std::vector<Decl> decls;
  std::vector<std::pair<std::string, Value>> consts;
  StmtP body;

  int find(const std::string & name) const;
  std::vector<size_t> of_role(Role r) const;
  // initial value of a non-input variable
  Value initial(size_t slot) const;
};

bool equal(const Program & a, const Program & b);

}  // namespace dope::lang
