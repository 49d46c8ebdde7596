#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dope/contract.h"
#include "dope/lang/ast.h"
#include "dope/verdict.h"

namespace dope::wp {

using lang::ExprP;
using lang::Program;
using lang::Stmt;
using lang::StmtP;

inline constexpr unsigned kDefaultUnroll = 64;

std::string prime(const std::string & name);

// S[x/x'] with every variable renamed through `names`
StmtP rename(const StmtP & s, const std::map<std::string, std::string> & names);

// Original declarations followed by primed copies; both bodies start by
// assigning the initial values of locals and outputs so that the VCs only
// mention parameters and inputs.
struct SelfComposition
{
  Program prog;
  StmtP body;
  StmtP body_primed;
};

SelfComposition self_compose(const Program & p);

// Predicate transformer for the deterministic fragment. Assignments to a
// gridded variable go through its snap; while loops are unrolled `unroll`
// times and states needing more iterations evaluate to unknown. When the
// unrolled predicate outgrows `node_limit` shared nodes, unrolling stops
// early and a note says so.
class WpEngine
{
 public:
  explicit WpEngine(const Program & decls, unsigned unroll = kDefaultUnroll,
                    size_t node_limit = 1 << 21);

  ExprP wp(const Stmt & s, const ExprP & q);
  const std::vector<std::string> & notes() const { return notes_; }

 private:
  ExprP wp_while(const Stmt & s, const ExprP & q);

  std::map<std::string, std::shared_ptr<const Domain>> grids_;
  unsigned unroll_;
  size_t node_limit_;
  std::vector<std::string> notes_;
};

ExprP wp(const Program & p, const Stmt & s, const ExprP & q, unsigned unroll = kDefaultUnroll);

// number of distinct nodes of a predicate DAG
size_t dag_size(const ExprP & e);
// printed form, or a size summary when the expanded tree exceeds max_chars
std::string render(const ExprP & e, size_t max_chars = 1 << 16);

struct Vc
{
  std::string property;               // clean | robust | fclean
  std::vector<ExprP> parts;           // all must be valid
  std::vector<std::string> part_names;
  std::vector<std::string> vars;      // free variables, enumeration order
  std::vector<Domain> domains;
  std::map<std::string, Value> symbols;  // kappa_in, kappa_out
  bool uses_y = false;
  std::vector<Value> ys;              // finite image of f over grid distances
  std::vector<std::string> notes;
};

Vc vc_clean(const Program & p, const Contract & c, unsigned unroll = kDefaultUnroll);
Vc vc_robustly_clean(const Program & p, const Contract & c, unsigned unroll = kDefaultUnroll);
Vc vc_f_clean(const Program & p, const Contract & c, unsigned unroll = kDefaultUnroll);
Vc make_vc(const std::string & property, const Program & p, const Contract & c,
           unsigned unroll = kDefaultUnroll);

struct CounterExample
{
  Valuation state;  // values of Vc::vars
  std::optional<Value> y;
  size_t part = 0;
};

struct Validity
{
  Status status = Status::Clean;  // Clean = valid
  std::optional<CounterExample> first;
  std::vector<CounterExample> all;  // with collect_all, capped
  size_t states = 0;
  size_t unknown_states = 0;
};

// exhaustive three-valued evaluation over the product of the domains
Validity check_validity(const ExprP & q, const std::vector<std::string> & vars,
                        const std::vector<const Domain *> & domains,
                        const std::map<std::string, Value> & symbols = {},
                        bool collect_all = false, size_t cap = 100000);

Validity check_vc(const Vc & vc, bool collect_all = false);

}  // namespace dope::wp
