#include "dope/wpengine.h"

#include <unordered_map>
#include <unordered_set>

#include "dope/errors.h"
#include "dope/parallel.h"
#include "dope/seqcheck.h"

namespace dope::wp {

using lang::Op;
using lang::Role;
using lang::StmtKind;

std::string prime(const std::string & name) { return name + "'"; }

namespace {

std::map<std::string, ExprP> var_map(const std::map<std::string, std::string> & names)
{
  std::map<std::string, ExprP> m;
  for (auto & [from, to] : names) m[from] = lang::var(to);
  return m;
}

StmtP rename_with(const StmtP & s, const std::map<std::string, std::string> & names,
                  const std::map<std::string, ExprP> & vars)
{
  auto target = [&](const std::string & x) {
    auto it = names.find(x);
    return it == names.end() ? x : it->second;
  };
  auto sub = [&](const ExprP & e) { return lang::substitute(e, vars); };
  StmtP out;
  switch (s->kind) {
    case StmtKind::Skip: return s;
    case StmtKind::Assign: out = lang::assign(target(s->var), sub(s->e)); break;
    case StmtKind::Nondet: out = lang::nondet(target(s->var), sub(s->lo), sub(s->hi)); break;
    case StmtKind::Seq: {
      std::vector<StmtP> items;
      for (auto & i : s->items) items.push_back(rename_with(i, names, vars));
      out = lang::seq(std::move(items));
      break;
    }
    case StmtKind::If:
      out = lang::if_(sub(s->e), rename_with(s->then_s, names, vars),
                      rename_with(s->else_s, names, vars));
      break;
    case StmtKind::While:
      out = lang::while_(sub(s->e), rename_with(s->body, names, vars));
      break;
  }
  auto copy = std::make_shared<Stmt>(*out);
  copy->pos = s->pos;
  return copy;
}

StmtP with_init(const Program & p, const StmtP & body, bool primed)
{
  std::vector<StmtP> items;
  for (size_t k = 0; k < p.decls.size(); ++k) {
    Role r = p.decls[k].role;
    if (r == Role::Output || r == Role::Local) {
      std::string n = primed ? prime(p.decls[k].name) : p.decls[k].name;
      items.push_back(lang::assign(n, lang::num(p.initial(k))));
    }
  }
  items.push_back(body);
  return lang::seq(std::move(items));
}

}  // namespace

StmtP rename(const StmtP & s, const std::map<std::string, std::string> & names)
{
  return rename_with(s, names, var_map(names));
}

SelfComposition self_compose(const Program & p)
{
  SelfComposition sc;
  sc.prog.decls = p.decls;
  sc.prog.consts = p.consts;
  std::map<std::string, std::string> names;
  for (auto & d : p.decls) {
    if (p.find(prime(d.name)) >= 0)
      throw DataError("variable '" + prime(d.name) + "' clashes with the primed copy of '"
                      + d.name + "'");
    names[d.name] = prime(d.name);
    lang::Decl copy = d;
    copy.name = prime(d.name);
    sc.prog.decls.push_back(copy);
  }
  sc.body = with_init(p, p.body, false);
  sc.body_primed = with_init(p, rename(p.body, names), true);
  return sc;
}

size_t dag_size(const ExprP & e)
{
  std::unordered_set<const lang::Expr *> seen;
  std::vector<const lang::Expr *> stack{e.get()};
  while (!stack.empty()) {
    auto x = stack.back();
    stack.pop_back();
    if (!seen.insert(x).second) continue;
    for (auto & a : x->args) stack.push_back(a.get());
  }
  return seen.size();
}

std::string render(const ExprP & e, size_t max_chars)
{
  // expanded tree size, saturating
  std::unordered_map<const lang::Expr *, size_t> size;
  std::function<size_t(const lang::Expr *)> tree = [&](const lang::Expr * x) -> size_t {
    if (auto it = size.find(x); it != size.end()) return it->second;
    size_t n = 1;
    for (auto & a : x->args) n = std::min<size_t>(n + tree(a.get()), SIZE_MAX / 4);
    return size[x] = n;
  };
  if (tree(e.get()) * 4 > max_chars)
    return "<predicate with " + std::to_string(dag_size(e)) + " shared nodes, too large to print>";
  return lang::to_string(*e);
}

WpEngine::WpEngine(const Program & decls, unsigned unroll, size_t node_limit)
    : unroll_(unroll), node_limit_(node_limit)
{
  for (auto & d : decls.decls)
    if (!d.domain.exact()) grids_[d.name] = std::make_shared<Domain>(d.domain);
}

ExprP WpEngine::wp(const Stmt & s, const ExprP & q)
{
  switch (s.kind) {
    case StmtKind::Skip: return q;
    case StmtKind::Assign: {
      ExprP e = s.e;
      if (auto it = grids_.find(s.var); it != grids_.end())
        e = lang::snap(e, it->second, s.var);
      return lang::substitute_folded(q, {{s.var, e}});
    }
    case StmtKind::Nondet:
      throw UnsupportedError("wp: nondeterministic assignment to '" + s.var
                             + "' is outside the deterministic fragment");
    case StmtKind::Seq: {
      ExprP r = q;
      for (auto it = s.items.rbegin(); it != s.items.rend(); ++it) r = wp(**it, r);
      return r;
    }
    case StmtKind::If:
      return lang::conj({lang::implies(s.e, wp(*s.then_s, q)),
                         lang::implies(lang::negate(s.e), wp(*s.else_s, q))});
    case StmtKind::While: return wp_while(s, q);
  }
  return q;
}

ExprP WpEngine::wp_while(const Stmt & s, const ExprP & q)
{
  // H_0 = !b && Q, H_{k+1} = (b && wp(S, H_k)) || H_0: terminates within
  // k iterations in a Q state. R_0 = b, R_{k+1} = b && wp(S, R_k): still
  // looping after k iterations.
  ExprP h0 = lang::conj({lang::negate(s.e), q});
  ExprP h = h0, r = s.e;
  for (unsigned k = 0; k < unroll_; ++k) {
    ExprP h2 = lang::disj({lang::conj({s.e, wp(*s.body, h)}), h0});
    ExprP r2 = lang::conj({s.e, wp(*s.body, r)});
    if (dag_size(h2) + dag_size(r2) > node_limit_) {
      notes_.push_back("loop at line " + std::to_string(s.pos.line) + " unrolled " + std::to_string(k)
                       + " times instead of " + std::to_string(unroll_)
                       + ": predicate size limit reached");
      break;
    }
    h = h2;
    r = r2;
  }
  return lang::disj({h, lang::conj({r, lang::unknown()})});
}

ExprP wp(const Program & p, const Stmt & s, const ExprP & q, unsigned unroll)
{
  WpEngine eng(p, unroll);
  return eng.wp(s, q);
}

namespace {

// Predicates of a contract as expressions over program variable names.
ExprP pintrs_pred(const Program & p, const Contract & c)
{
  if (!c.pintrs.valuations) return role_predicate(p, Role::Param, c.pintrs.predicate);
  std::vector<ExprP> alts;
  for (auto & v : parameter_space(p, c)) {
    std::vector<ExprP> eqs;
    auto slots = p.of_role(Role::Param);
    for (size_t k = 0; k < slots.size(); ++k)
      eqs.push_back(lang::binary(Op::Eq, lang::var(p.decls[slots[k]].name), lang::num(v[k])));
    alts.push_back(lang::conj(std::move(eqs)));
  }
  return lang::disj(std::move(alts));
}

std::vector<ExprP> vars_of(const Program & p, Role r, bool primed)
{
  std::vector<ExprP> out;
  for (size_t k : p.of_role(r))
    out.push_back(lang::var(primed ? prime(p.decls[k].name) : p.decls[k].name));
  return out;
}

struct Parts
{
  SelfComposition sc;
  std::map<std::string, ExprP> to_primed;
  ExprP pintrs, pintrs_p, stdin, stdin_p;
};

Parts setup(const Program & p, const Contract & c)
{
  if (!lang::deterministic(*p.body))
    throw UnsupportedError("wp: the program is nondeterministic; the wp path covers "
                           "deterministic programs only");
  Parts s{self_compose(p), {}, nullptr, nullptr, nullptr, nullptr};
  for (auto & d : p.decls) s.to_primed[d.name] = lang::var(prime(d.name));
  s.pintrs = pintrs_pred(p, c);
  s.pintrs_p = lang::substitute(s.pintrs, s.to_primed);
  s.stdin = role_predicate(p, Role::Input, c.stdin_spec);
  s.stdin_p = lang::substitute(s.stdin, s.to_primed);
  return s;
}

void fill_vars(Vc & vc, const Program & p)
{
  for (bool primed : {false, true})
    for (Role r : {Role::Param, Role::Input})
      for (size_t k : p.of_role(r)) {
        const lang::Decl & d = p.decls[k];
        if (d.domain.exact())
          throw DataError(std::string(lang::role_name(r)) + " '" + d.name
                          + "' needs a declared grid for validity checking");
        vc.vars.push_back(primed ? prime(d.name) : d.name);
        vc.domains.push_back(d.domain);
      }
}

// both orders of the composition, each guarded by its termination term
std::vector<ExprP> both_orders(WpEngine & eng, const Parts & s, const ExprP & ante,
                               const ExprP & goal)
{
  ExprP first = lang::implies(eng.wp(*s.sc.body, lang::truth(true)),
                              eng.wp(*s.sc.body, eng.wp(*s.sc.body_primed, goal)));
  ExprP second = lang::implies(eng.wp(*s.sc.body_primed, lang::truth(true)),
                               eng.wp(*s.sc.body_primed, eng.wp(*s.sc.body, goal)));
  return {lang::implies(ante, first), lang::implies(ante, second)};
}

}  // namespace

Vc vc_clean(const Program & p, const Contract & c, unsigned unroll)
{
  Parts s = setup(p, c);
  WpEngine eng(s.sc.prog, unroll);
  std::vector<ExprP> ante{s.pintrs, s.stdin, s.pintrs_p, s.stdin_p};
  auto xi = vars_of(p, Role::Input, false), xi_p = vars_of(p, Role::Input, true);
  for (size_t k = 0; k < xi.size(); ++k) ante.push_back(lang::binary(Op::Eq, xi[k], xi_p[k]));
  ante.push_back(eng.wp(*s.sc.body, lang::truth(true)));
  auto xo = vars_of(p, Role::Output, false), xo_p = vars_of(p, Role::Output, true);
  std::vector<ExprP> eqs;
  for (size_t k = 0; k < xo.size(); ++k) eqs.push_back(lang::binary(Op::Eq, xo[k], xo_p[k]));
  ExprP goal = eng.wp(*s.sc.body, eng.wp(*s.sc.body_primed, lang::conj(std::move(eqs))));
  Vc vc;
  vc.property = "clean";
  vc.parts = {lang::implies(lang::conj(std::move(ante)), goal)};
  vc.part_names = {"S;S'"};
  fill_vars(vc, p);
  vc.notes = eng.notes();
  return vc;
}

Vc vc_robustly_clean(const Program & p, const Contract & c, unsigned unroll)
{
  Parts s = setup(p, c);
  WpEngine eng(s.sc.prog, unroll);
  auto din = std::make_shared<Distance>(c.d_in);
  auto dout = std::make_shared<Distance>(c.d_out);
  ExprP ante = lang::conj({s.pintrs, s.stdin, s.pintrs_p,
                           lang::binary(Op::Le,
                                        lang::dist(din, "d_in", vars_of(p, Role::Input, false),
                                                   vars_of(p, Role::Input, true)),
                                        lang::sym("kappa_in"))});
  ExprP goal = lang::binary(Op::Le,
                            lang::dist(dout, "d_out", vars_of(p, Role::Output, false),
                                       vars_of(p, Role::Output, true)),
                            lang::sym("kappa_out"));
  Vc vc;
  vc.property = "robust";
  vc.parts = both_orders(eng, s, ante, goal);
  vc.part_names = {"S;S'", "S';S"};
  vc.symbols = {{"kappa_in", c.kappa_in}, {"kappa_out", c.kappa_out}};
  fill_vars(vc, p);
  vc.notes = eng.notes();
  return vc;
}

Vc vc_f_clean(const Program & p, const Contract & c, unsigned unroll)
{
  if (!c.f) throw DataError("contract has no bounding function f");
  Parts s = setup(p, c);
  WpEngine eng(s.sc.prog, unroll);
  auto din = std::make_shared<Distance>(c.d_in);
  auto dout = std::make_shared<Distance>(c.d_out);
  auto f = std::make_shared<BoundFn>(*c.f);
  ExprP fd = lang::bound(f, "f",
                         lang::dist(din, "d_in", vars_of(p, Role::Input, false),
                                    vars_of(p, Role::Input, true)));
  ExprP ante = lang::conj({s.pintrs, s.stdin, s.pintrs_p,
                           lang::binary(Op::Eq, fd, lang::sym("Y"))});
  ExprP goal = lang::binary(Op::Le,
                            lang::dist(dout, "d_out", vars_of(p, Role::Output, false),
                                       vars_of(p, Role::Output, true)),
                            lang::sym("Y"));
  Vc vc;
  vc.property = "fclean";
  vc.parts = both_orders(eng, s, ante, goal);
  vc.part_names = {"S;S'", "S';S"};
  vc.uses_y = true;
  fill_vars(vc, p);
  vc.notes = eng.notes();

  // Y ranges over the finite image of f on realisable input distances
  std::vector<const Domain *> doms;
  for (size_t k : p.of_role(Role::Input)) doms.push_back(&p.decls[k].domain);
  auto inputs = product(doms);
  std::set<Value> ys;
  for (auto & a : inputs)
    for (auto & b : inputs) {
      Value y = (*c.f)(c.d_in(a, b));
      if (!y.is_inf()) ys.insert(y);
    }
  vc.ys.assign(ys.begin(), ys.end());
  return vc;
}

Vc make_vc(const std::string & property, const Program & p, const Contract & c, unsigned unroll)
{
  if (property == "clean") return vc_clean(p, c, unroll);
  if (property == "robust") return vc_robustly_clean(p, c, unroll);
  if (property == "fclean") return vc_f_clean(p, c, unroll);
  throw DataError("wp: unsupported property '" + property + "'");
}

namespace {

enum Tri : uint8_t { F = 0, T = 1, U = 2 };

struct Node
{
  Op op;
  Value num;
  int slot = -1;
  std::vector<int> args;
  const lang::Expr * src = nullptr;
};

// Predicate DAG flattened in evaluation order (children first).
class Compiled
{
 public:
  Compiled(const ExprP & q, const std::vector<std::string> & vars,
           const std::map<std::string, Value> & symbols)
  {
    std::map<std::string, int> slot;
    for (size_t k = 0; k < vars.size(); ++k) slot[vars[k]] = int(k);
    std::unordered_map<const lang::Expr *, int> id;
    std::function<int(const lang::Expr *)> go = [&](const lang::Expr * e) -> int {
      if (auto it = id.find(e); it != id.end()) return it->second;
      Node n;
      n.op = e->op;
      n.num = e->num;
      n.src = e;
      if (e->op == Op::Var || e->op == Op::Sym) {
        if (auto it = slot.find(e->name); e->op == Op::Var && it != slot.end()) {
          n.slot = it->second;
        } else if (auto s = symbols.find(e->name); s != symbols.end()) {
          n.op = Op::Num;
          n.num = s->second;
        } else {
          throw DataError("predicate variable '" + e->name + "' is not enumerated");
        }
      }
      if (lang::is_temporal(e->op))
        throw UnsupportedError("temporal operator in a state predicate");
      for (auto & a : e->args) n.args.push_back(go(a.get()));
      nodes_.push_back(std::move(n));
      return id[e] = int(nodes_.size() - 1);
    };
    root_ = go(q.get());
  }

  Tri eval(const Valuation & state, std::vector<Value> & val, std::vector<uint8_t> & ok) const
  {
    val.resize(nodes_.size());
    ok.assign(nodes_.size(), 1);
    for (size_t k = 0; k < nodes_.size(); ++k) {
      const Node & n = nodes_[k];
      auto num = [&](int a) { return val[a]; };
      auto good = [&]() {
        for (int a : n.args)
          if (!ok[a]) return false;
        return true;
      };
      auto tri = [&](int a) { return Tri(val[a].mantissa()); };
      auto set_tri = [&](Tri t) { val[k] = Value::raw(t); };
      try {
        switch (n.op) {
          case Op::Num: val[k] = n.num; break;
          case Op::Var: val[k] = state[n.slot]; break;
          case Op::True: set_tri(T); break;
          case Op::False: set_tri(F); break;
          case Op::Unknown: set_tri(U); break;
          case Op::Neg: case Op::Add: case Op::Sub: case Op::Mul: case Op::Div:
          case Op::Pow: case Op::Abs: case Op::Snap: case Op::Bound: case Op::Dist: {
            if (!good()) {
              ok[k] = 0;
              break;
            }
            switch (n.op) {
              case Op::Neg: val[k] = -num(n.args[0]); break;
              case Op::Add: val[k] = num(n.args[0]) + num(n.args[1]); break;
              case Op::Sub: val[k] = num(n.args[0]) - num(n.args[1]); break;
              case Op::Mul: val[k] = num(n.args[0]) * num(n.args[1]); break;
              case Op::Div: val[k] = num(n.args[0]) / num(n.args[1]); break;
              case Op::Pow:
                val[k] = num(n.args[0]).pow(unsigned(n.num.mantissa() / Value::kScale));
                break;
              case Op::Abs: val[k] = num(n.args[0]).abs(); break;
              case Op::Snap: val[k] = n.src->domain->snap(num(n.args[0])); break;
              case Op::Bound: val[k] = (*n.src->bound)(num(n.args[0])); break;
              default: {
                size_t h = n.args.size() / 2;
                Valuation a(h), b(h);
                for (size_t i = 0; i < h; ++i) {
                  a[i] = num(n.args[i]);
                  b[i] = num(n.args[h + i]);
                }
                val[k] = (*n.src->dist)(a, b);
              }
            }
            break;
          }
          case Op::Lt: case Op::Le: case Op::Gt: case Op::Ge: case Op::Eq: case Op::Ne:
          case Op::InRange: {
            if (!good()) {
              set_tri(U);
              break;
            }
            Value a = num(n.args[0]), b = num(n.args[1]);
            bool r = false;
            switch (n.op) {
              case Op::Lt: r = a < b; break;
              case Op::Le: r = a <= b; break;
              case Op::Gt: r = a > b; break;
              case Op::Ge: r = a >= b; break;
              case Op::Eq: r = a == b; break;
              case Op::Ne: r = a != b; break;
              default: {
                Value hi = num(n.args[2]);
                r = (n.src->lo_open ? a > b : a >= b) && (n.src->hi_open ? a < hi : a <= hi);
              }
            }
            set_tri(r ? T : F);
            break;
          }
          case Op::Not: {
            Tri a = tri(n.args[0]);
            set_tri(a == U ? U : a == T ? F : T);
            break;
          }
          case Op::And: case Op::Or: case Op::Implies: {
            Tri a = tri(n.args[0]), b = tri(n.args[1]);
            if (n.op == Op::Implies) a = a == U ? U : a == T ? F : T;
            if (n.op == Op::And)
              set_tri(a == F || b == F ? F : a == U || b == U ? U : T);
            else
              set_tri(a == T || b == T ? T : a == U || b == U ? U : F);
            break;
          }
          default: throw UnsupportedError("unexpected predicate node");
        }
      } catch (const EvalError &) {
        // division by zero, overflow: the value is unknown here
        if (lang::is_boolean(n.op))
          set_tri(U);
        else
          ok[k] = 0;
      }
    }
    return Tri(val[root_].mantissa());
  }

 private:
  std::vector<Node> nodes_;
  int root_ = 0;
};

}  // namespace

Validity check_validity(const ExprP & q, const std::vector<std::string> & vars,
                        const std::vector<const Domain *> & domains,
                        const std::map<std::string, Value> & symbols, bool collect_all,
                        size_t cap)
{
  if (!lang::is_boolean(q->op)) throw DataError("validity of a non-boolean expression");
  Compiled prog(q, vars, symbols);
  auto states = product(domains);
  std::vector<uint8_t> res(states.size());
  size_t chunk = 256;
  parallel_for((states.size() + chunk - 1) / chunk, [&](size_t c) {
    std::vector<Value> val;
    std::vector<uint8_t> ok;
    for (size_t k = c * chunk; k < std::min(states.size(), (c + 1) * chunk); ++k)
      res[k] = prog.eval(states[k], val, ok);
  });
  Validity v;
  v.states = states.size();
  for (size_t k = 0; k < states.size(); ++k) {
    if (res[k] == U) ++v.unknown_states;
    if (res[k] != F) continue;
    if (!v.first) v.first = CounterExample{states[k], std::nullopt, 0};
    if (!collect_all) break;
    if (v.all.size() < cap) v.all.push_back({states[k], std::nullopt, 0});
  }
  v.status = v.first ? Status::Doped : v.unknown_states ? Status::Unknown : Status::Clean;
  return v;
}

Validity check_vc(const Vc & vc, bool collect_all)
{
  std::vector<const Domain *> doms;
  for (auto & d : vc.domains) doms.push_back(&d);
  std::vector<std::optional<Value>> ys;
  if (vc.uses_y)
    ys.assign(vc.ys.begin(), vc.ys.end());
  else
    ys.push_back(std::nullopt);
  Validity out;
  for (auto & y : ys)
    for (size_t part = 0; part < vc.parts.size(); ++part) {
      auto symbols = vc.symbols;
      if (y) symbols["Y"] = *y;
      Validity v = check_validity(vc.parts[part], vc.vars, doms, symbols, collect_all);
      out.states += v.states;
      out.unknown_states += v.unknown_states;
      auto tag = [&](CounterExample ce) {
        ce.y = y;
        ce.part = part;
        return ce;
      };
      if (v.first && !out.first) out.first = tag(*v.first);
      for (auto & ce : v.all) out.all.push_back(tag(ce));
      if (out.first && !collect_all) {
        out.status = Status::Doped;
        return out;
      }
    }
  out.status = out.first ? Status::Doped : out.unknown_states ? Status::Unknown : Status::Clean;
  return out;
}

}  // namespace dope::wp
