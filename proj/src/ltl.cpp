#include "dope/ltl.h"

#include <algorithm>
#include <functional>
#include <iterator>
#include <unordered_set>

#include "dope/errors.h"

namespace dope::react {

namespace {

Valuation pick(const Valuation & v, const std::vector<size_t> & sel)
{
  Valuation out;
  out.reserve(sel.size());
  for (size_t k : sel) out.push_back(v[k]);
  return out;
}

LtlP make(Ltl::Op op, std::vector<LtlP> args)
{
  auto f = std::make_shared<Ltl>();
  f->op = op;
  f->args = std::move(args);
  return f;
}

bool is_const(const LtlP & f, bool v)
{
  return f->op == (v ? Ltl::Op::True : Ltl::Op::False);
}

// structural key; atoms are identified by kind, variables and text
std::string key(const Ltl & f)
{
  using Op = Ltl::Op;
  auto join = [&](const char * tag) {
    std::string s = tag;
    s += '(';
    for (size_t k = 0; k < f.args.size(); ++k) {
      if (k) s += ',';
      s += key(*f.args[k]);
    }
    return s + ')';
  };
  switch (f.op) {
    case Op::True: return "1";
    case Op::False: return "0";
    case Op::Atom:
      return "a" + std::to_string(int(f.atom->kind)) + ":" + std::to_string(f.atom->a) + ":"
             + std::to_string(f.atom->b) + ":" + f.atom->text;
    case Op::Not: return join("!");
    case Op::And: return join("&");
    case Op::Or: return join("|");
    case Op::Implies: return join(">");
    case Op::Next: return join("X");
    case Op::Globally: return join("G");
    case Op::Finally: return join("F");
    case Op::Until: return join("U");
    case Op::WeakUntil: return join("W");
  }
  return "?";
}

LtlP junction(Ltl::Op op, std::vector<LtlP> xs)
{
  bool is_and = op == Ltl::Op::And;
  std::vector<std::pair<std::string, LtlP>> items;
  std::unordered_set<std::string> seen;
  std::function<void(const LtlP &)> add = [&](const LtlP & x) {
    if (x->op == op) {
      for (auto & y : x->args) add(y);
      return;
    }
    items.emplace_back(key(*x), x);
  };
  for (auto & x : xs) add(x);
  std::vector<std::pair<std::string, LtlP>> kept;
  for (auto & it : items) {
    if (is_const(it.second, !is_and)) return ltl_const(!is_and);  // absorbing
    if (is_const(it.second, is_and)) continue;                      // neutral
    if (seen.insert(it.first).second) kept.push_back(it);
  }
  if (kept.empty()) return ltl_const(is_and);
  if (kept.size() == 1) return kept[0].second;
  std::sort(kept.begin(), kept.end(),
            [](const auto & a, const auto & b) { return a.first < b.first; });
  std::vector<LtlP> args;
  for (auto & it : kept) args.push_back(it.second);
  return make(op, std::move(args));
}

bool has_temporal(const lang::Expr & e)
{
  if (lang::is_temporal(e.op)) return true;
  for (auto & a : e.args)
    if (has_temporal(*a)) return true;
  return false;
}

LtlP prog(const LtlP & f, const std::function<bool(const Atom &)> & truth)
{
  using Op = Ltl::Op;
  switch (f->op) {
    case Op::True:
    case Op::False: return f;
    case Op::Atom: return ltl_const(truth(*f->atom));
    case Op::Not:
      if (f->args[0]->op != Op::Atom) break;
      return ltl_const(!truth(*f->args[0]->atom));
    case Op::And:
    case Op::Or: {
      std::vector<LtlP> xs;
      for (auto & a : f->args) xs.push_back(prog(a, truth));
      return junction(f->op, std::move(xs));
    }
    case Op::Next: return f->args[0];
    case Op::Globally: return ltl_and({prog(f->args[0], truth), f});
    case Op::WeakUntil:
      return ltl_or({prog(f->args[1], truth), ltl_and({prog(f->args[0], truth), f})});
    default: break;
  }
  throw UnsupportedError("progression needs a formula in safety normal form");
}

// Minimal DNF over the non-boolean subformulas; clauses that contain
// another clause are dropped. Progression only ever yields boolean
// combinations of a finite closure, so this keeps the state space finite.
LtlP canonical(const LtlP & f)
{
  using Op = Ltl::Op;
  using Clause = std::vector<std::string>;  // sorted keys
  std::unordered_map<std::string, LtlP> lits;
  std::function<std::vector<Clause>(const LtlP &)> dnf = [&](const LtlP & g) -> std::vector<Clause> {
    if (g->op == Op::True) return {Clause{}};
    if (g->op == Op::False) return {};
    if (g->op == Op::Or) {
      std::vector<Clause> out;
      for (auto & a : g->args) {
        auto d = dnf(a);
        out.insert(out.end(), d.begin(), d.end());
      }
      return out;
    }
    if (g->op == Op::And) {
      std::vector<Clause> acc{Clause{}};
      for (auto & a : g->args) {
        auto d = dnf(a);
        std::vector<Clause> next;
        for (auto & x : acc)
          for (auto & y : d) {
            Clause c;
            std::set_union(x.begin(), x.end(), y.begin(), y.end(), std::back_inserter(c));
            next.push_back(std::move(c));
          }
        acc = std::move(next);
        if (acc.size() > 4096) throw UnsupportedError("monitor state too large");
      }
      return acc;
    }
    std::string k = key(*g);
    lits.emplace(k, g);
    return {Clause{k}};
  };
  auto cs = dnf(f);
  std::sort(cs.begin(), cs.end(), [](const Clause & a, const Clause & b) {
    return a.size() != b.size() ? a.size() < b.size() : a < b;
  });
  std::vector<Clause> kept;
  for (auto & c : cs) {
    bool subsumed = false;
    for (auto & k : kept)
      if (std::includes(c.begin(), c.end(), k.begin(), k.end())) {
        subsumed = true;
        break;
      }
    if (!subsumed) kept.push_back(c);
  }
  std::vector<LtlP> ors;
  for (auto & c : kept) {
    std::vector<LtlP> ands;
    for (auto & k : c) ands.push_back(lits.at(k));
    ors.push_back(junction(Op::And, std::move(ands)));
  }
  return junction(Op::Or, std::move(ors));
}

void collect_atoms(const LtlP & f, std::vector<AtomP> & out,
                   std::unordered_map<const Atom *, size_t> & index)
{
  if (f->op == Ltl::Op::Atom) {
    if (!index.count(f->atom.get())) {
      index[f->atom.get()] = out.size();
      out.push_back(f->atom);
    }
    return;
  }
  for (auto & a : f->args) collect_atoms(a, out, index);
}

}  // namespace

bool Atom::eval(const std::vector<const Valuation *> & letters) const
{
  const Valuation & la = *letters[a];
  switch (kind) {
    case Kind::State: {
      lang::Env env{la.data(), nullptr};
      return lang::eval_bool(*pred, env);
    }
    case Kind::Equal: {
      const Valuation & lb = *letters[b];
      for (size_t k : sel)
        if (la[k] != lb[k]) return false;
      return true;
    }
    case Kind::InDist: return (*d_in)(pick(la, sel), pick(*letters[b], sel)) <= bound;
    case Kind::OutDist: return (*d_out)(pick(la, sel), pick(*letters[b], sel)) <= bound;
    case Kind::OutDistF: {
      const Valuation & lb = *letters[b];
      return (*d_out)(pick(la, sel), pick(lb, sel)) <= (*f)((*d_in)(pick(la, sel2), pick(lb, sel2)));
    }
    case Kind::Member: return allowed->count(pick(la, sel)) > 0;
    case Kind::Bit: return dom->index_of(la[sel[0]]) >> bit & 1;
  }
  return false;
}

LtlP ltl_const(bool b)
{
  static const LtlP t = make(Ltl::Op::True, {});
  static const LtlP f = make(Ltl::Op::False, {});
  return b ? t : f;
}

LtlP ltl_atom(AtomP a)
{
  auto f = std::make_shared<Ltl>();
  f->op = Ltl::Op::Atom;
  f->atom = std::move(a);
  return f;
}

LtlP ltl_not(LtlP a)
{
  if (a->op == Ltl::Op::True) return ltl_const(false);
  if (a->op == Ltl::Op::False) return ltl_const(true);
  if (a->op == Ltl::Op::Not) return a->args[0];
  return make(Ltl::Op::Not, {std::move(a)});
}

LtlP ltl_and(std::vector<LtlP> xs) { return junction(Ltl::Op::And, std::move(xs)); }
LtlP ltl_or(std::vector<LtlP> xs) { return junction(Ltl::Op::Or, std::move(xs)); }

LtlP ltl_implies(LtlP a, LtlP b)
{
  if (is_const(a, true)) return b;
  if (is_const(a, false) || is_const(b, true)) return ltl_const(true);
  return make(Ltl::Op::Implies, {std::move(a), std::move(b)});
}

LtlP ltl_next(LtlP a)
{
  if (a->op == Ltl::Op::True || a->op == Ltl::Op::False) return a;
  return make(Ltl::Op::Next, {std::move(a)});
}

LtlP ltl_globally(LtlP a)
{
  if (a->op == Ltl::Op::True || a->op == Ltl::Op::False) return a;
  return make(Ltl::Op::Globally, {std::move(a)});
}

LtlP ltl_finally(LtlP a)
{
  if (a->op == Ltl::Op::True || a->op == Ltl::Op::False) return a;
  return make(Ltl::Op::Finally, {std::move(a)});
}

LtlP ltl_until(LtlP a, LtlP b) { return make(Ltl::Op::Until, {std::move(a), std::move(b)}); }

LtlP ltl_weak_until(LtlP a, LtlP b)
{
  if (is_const(b, true) || is_const(a, true)) return ltl_const(true);
  if (is_const(b, false)) return ltl_globally(std::move(a));
  return make(Ltl::Op::WeakUntil, {std::move(a), std::move(b)});
}

std::string to_string(const Ltl & f, const std::vector<std::string> & names)
{
  using Op = Ltl::Op;
  auto sub = [&](size_t k) {
    const Ltl & a = *f.args[k];
    std::string s = to_string(a, names);
    bool simple = a.op == Op::Atom || a.op == Op::True || a.op == Op::False || a.op == Op::Not
                  || a.op == Op::Next || a.op == Op::Globally || a.op == Op::Finally;
    return simple ? s : "(" + s + ")";
  };
  auto infix = [&](const char * sep) {
    std::string s;
    for (size_t k = 0; k < f.args.size(); ++k) s += (k ? sep : "") + sub(k);
    return s;
  };
  switch (f.op) {
    case Op::True: return "true";
    case Op::False: return "false";
    case Op::Atom: {
      std::string s = f.atom->text;
      for (auto [ph, var] : {std::pair{"$a", f.atom->a}, std::pair{"$b", f.atom->b}}) {
        const std::string & n = size_t(var) < names.size() ? names[var] : "?";
        for (size_t at; (at = s.find(ph)) != std::string::npos;) s.replace(at, 2, n);
      }
      return s;
    }
    case Op::Not: return "!" + sub(0);
    case Op::And: return infix(" && ");
    case Op::Or: return infix(" || ");
    case Op::Implies: return infix(" -> ");
    case Op::Next: return "X " + sub(0);
    case Op::Globally: return "G " + sub(0);
    case Op::Finally: return "F " + sub(0);
    case Op::Until: return infix(" U ");
    case Op::WeakUntil: return infix(" W ");
  }
  return "?";
}

LtlP from_expr(const lang::ExprP & e, int var)
{
  using lang::Op;
  if (e->op == Op::True) return ltl_const(true);
  if (e->op == Op::False) return ltl_const(false);
  if (!has_temporal(*e)) {
    auto a = std::make_shared<Atom>();
    a->kind = Atom::Kind::State;
    a->a = a->b = var;
    a->pred = e;
    a->text = "{" + lang::to_string(*e) + "}[$a]";
    return ltl_atom(a);
  }
  auto arg = [&](size_t k) { return from_expr(e->args[k], var); };
  switch (e->op) {
    case Op::Not: return ltl_not(arg(0));
    case Op::And: return ltl_and({arg(0), arg(1)});
    case Op::Or: return ltl_or({arg(0), arg(1)});
    case Op::Implies: return ltl_implies(arg(0), arg(1));
    case Op::Next: return ltl_next(arg(0));
    case Op::Globally: return ltl_globally(arg(0));
    case Op::Finally: return ltl_finally(arg(0));
    case Op::Until: return ltl_until(arg(0), arg(1));
    case Op::WeakUntil: return ltl_weak_until(arg(0), arg(1));
    default: break;
  }
  throw UnsupportedError("temporal operator inside a comparison: " + lang::to_string(*e));
}

namespace {

LtlP nnf(const LtlP & f, bool neg)
{
  using Op = Ltl::Op;
  auto outside = [](const char * op) {
    throw UnsupportedError(std::string("operator ") + op + " is outside the safety fragment");
  };
  switch (f->op) {
    case Op::True:
    case Op::False: return ltl_const((f->op == Op::True) != neg);
    case Op::Atom: return neg ? ltl_not(f) : f;
    case Op::Not: return nnf(f->args[0], !neg);
    case Op::And:
    case Op::Or: {
      std::vector<LtlP> xs;
      for (auto & a : f->args) xs.push_back(nnf(a, neg));
      return (f->op == Op::And) != neg ? ltl_and(std::move(xs)) : ltl_or(std::move(xs));
    }
    case Op::Implies:
      return nnf(ltl_or({ltl_not(f->args[0]), f->args[1]}), neg);
    case Op::Next: return ltl_next(nnf(f->args[0], neg));
    case Op::Globally:
      if (neg) outside("F (negated G)");
      return ltl_globally(nnf(f->args[0], false));
    case Op::Finally:
      if (!neg) outside("F");
      return ltl_globally(nnf(f->args[0], true));
    case Op::WeakUntil:
      if (neg) outside("U (negated W)");
      return ltl_weak_until(nnf(f->args[0], false), nnf(f->args[1], false));
    case Op::Until:
      if (!neg) outside("U");
      // !(a U b) == !b W (!a && !b)
      return ltl_weak_until(nnf(f->args[1], true),
                            ltl_and({nnf(f->args[0], true), nnf(f->args[1], true)}));
  }
  return f;
}

}  // namespace

LtlP safety_nnf(const LtlP & f) { return nnf(f, false); }

LtlP progress(const LtlP & f, const std::vector<const Valuation *> & letters)
{
  return canonical(prog(f, [&](const Atom & a) { return a.eval(letters); }));
}

SafetyAutomaton::SafetyAutomaton(const LtlP & body)
{
  LtlP f = safety_nnf(body);
  collect_atoms(f, atoms_, atom_index_);
  if (atoms_.size() > 32) throw UnsupportedError("more than 32 distinct atoms in a formula");
  states_ = {ltl_const(false), ltl_const(true)};
  ids_ = {{"0", kFalse}, {"1", kTrue}};
  initial_ = intern(canonical(f));
}

uint32_t SafetyAutomaton::intern(const LtlP & f) const
{
  std::string k = key(*f);
  auto it = ids_.find(k);
  if (it != ids_.end()) return it->second;
  uint32_t id = states_.size();
  states_.push_back(f);
  ids_.emplace(std::move(k), id);
  return id;
}

uint64_t SafetyAutomaton::mask(const std::vector<const Valuation *> & letters) const
{
  uint64_t m = 0;
  for (size_t k = 0; k < atoms_.size(); ++k)
    if (atoms_[k]->eval(letters)) m |= uint64_t(1) << k;
  return m;
}

uint32_t SafetyAutomaton::step(uint32_t q, uint64_t m) const
{
  if (q == kFalse || q == kTrue) return q;
  std::lock_guard lock(mu_);
  uint64_t k = uint64_t(q) << 32 | m;
  auto it = delta_.find(k);
  if (it != delta_.end()) return it->second;
  LtlP next = canonical(prog(states_[q], [&](const Atom & a) {
    return bool(m >> atom_index_.at(&a) & 1);
  }));
  uint32_t r = intern(next);
  delta_.emplace(k, r);
  return r;
}

size_t SafetyAutomaton::size() const
{
  std::lock_guard lock(mu_);
  return states_.size();
}

LtlP SafetyAutomaton::state(uint32_t q) const
{
  std::lock_guard lock(mu_);
  return states_.at(q);
}

}  // namespace dope::react
