#include <algorithm>
#include <functional>

#include "dope/errors.h"
#include "dope/hypercheck.h"
#include "dope/lang/parser.h"

namespace dope::hyper {

using react::Atom;
using react::Ltl;

const char * property_name(Property p)
{
  switch (p) {
    case Property::Clean: return "clean";
    case Property::Robust: return "robust";
    case Property::FClean: return "fclean";
  }
  return "?";
}

Property parse_property(const std::string & s)
{
  if (s == "clean") return Property::Clean;
  if (s == "robust") return Property::Robust;
  if (s == "fclean") return Property::FClean;
  throw DataError("unknown property '" + s + "' (clean, robust or fclean)");
}

const char * truth_name(Truth t)
{
  switch (t) {
    case Truth::Holds: return "holds";
    case Truth::Fails: return "fails";
    case Truth::Unknown: return "unknown";
  }
  return "?";
}

std::vector<std::string> HyperFormula::names() const
{
  std::vector<std::string> out;
  for (auto & q : prefix) out.push_back(q.second);
  return out;
}

std::string HyperFormula::str() const
{
  std::string s;
  for (auto & [q, name] : prefix) s += (q == Quant::Forall ? "forall " : "exists ") + name + ". ";
  auto n = names();
  bool trivial = !premise || premise->op == Ltl::Op::True;
  if (!trivial) s += "(" + react::to_string(*premise, n) + ") -> ";
  std::string b = react::to_string(*body, n);
  return s + (trivial ? b : "(" + b + ")");
}

namespace {

Valuation pick(const Valuation & v, const std::vector<size_t> & sel)
{
  Valuation out;
  for (size_t k : sel) out.push_back(v[k]);
  return out;
}

std::string role_tag(Role r) { return r == Role::Param ? "p" : r == Role::Input ? "i" : "o"; }

LtlP atom(std::shared_ptr<Atom> a) { return react::ltl_atom(std::move(a)); }

}  // namespace

Vocabulary::Vocabulary(const Signature & sig, const Contract & c) : sig_(sig), c_(c)
{
  par_sel_ = sig.of_role(Role::Param);
  in_sel_ = sig.of_role(Role::Input);
  out_sel_ = sig.of_role(Role::Output);
  size_t n = sig.letter_count(Role::Param);
  pintrs_.assign(n, false);
  if (c.pintrs.valuations) {
    for (auto & m : *c.pintrs.valuations) {
      for (auto & [name, val] : m) {
        int k = sig.find(name);
        if (k < 0 || sig.signal(k).role != Role::Param)
          throw DataError("pintrs names unknown parameter '" + name + "'");
      }
      Valuation v = sig.letter_values(Role::Param, 0);
      for (size_t k : par_sel_) {
        auto it = m.find(sig.signal(k).name);
        if (it == m.end()) throw DataError("pintrs entry lacks parameter '" + sig.signal(k).name + "'");
        if (!sig.signal(k).domain.contains(it->second))
          throw DataError("pintrs value " + it->second.str() + " of '" + sig.signal(k).name
                          + "' is not on its grid");
        v[k] = it->second;
      }
      pintrs_[sig.letter(v, Role::Param)] = true;
    }
  } else {
    LtlP pred = react::parse_role_formula(sig, Role::Param, c.pintrs.predicate, 0);
    if (pred->op != Ltl::Op::True && pred->op != Ltl::Op::False && pred->op != Ltl::Op::Atom)
      throw DataError("pintrs predicate '" + c.pintrs.predicate + "' is not a condition");
    for (uint32_t l = 0; l < n; ++l) {
      Valuation v = sig.letter_values(Role::Param, l);
      pintrs_[l] = pred->op == Ltl::Op::True || (pred->op == Ltl::Op::Atom && pred->atom->eval({&v}));
    }
  }
  // validate StdIn now so errors surface before any search
  react::parse_role_formula(sig, Role::Input, c.stdin_spec, 0);
  d_in_ = std::make_shared<Distance>(c.d_in);
  d_out_ = std::make_shared<Distance>(c.d_out);
  f_ = std::make_shared<BoundFn>(c.f.value_or(BoundFn::threshold(c.kappa_in, c.kappa_out)));
}

bool Vocabulary::past_forgetful() const
{
  return c_.d_in.kind() != Distance::Kind::DNew && c_.d_out.kind() != Distance::Kind::DNew;
}

LtlP Vocabulary::pintrs(int var) const
{
  if (std::all_of(pintrs_.begin(), pintrs_.end(), [](bool b) { return b; }))
    return react::ltl_const(true);
  auto a = std::make_shared<Atom>();
  a->kind = Atom::Kind::Member;
  a->a = a->b = var;
  a->sel = par_sel_;
  auto set = std::make_shared<std::set<Valuation>>();
  for (uint32_t l = 0; l < pintrs_.size(); ++l)
    if (pintrs_[l]) set->insert(pick(sig_.letter_values(Role::Param, l), par_sel_));
  a->allowed = set;
  a->text = "PIntrs[$a]";
  return atom(a);
}

LtlP Vocabulary::stdin_(int var) const
{
  return react::parse_role_formula(sig_, Role::Input, c_.stdin_spec, var);
}

LtlP Vocabulary::same(Role r, int a, int b) const
{
  auto at = std::make_shared<Atom>();
  at->kind = Atom::Kind::Equal;
  at->a = a;
  at->b = b;
  at->sel = sig_.of_role(r);
  if (at->sel.empty()) return react::ltl_const(true);
  at->text = role_tag(r) + "[$a] = " + role_tag(r) + "[$b]";
  return atom(at);
}

LtlP Vocabulary::in_within(int a, int b) const
{
  auto at = std::make_shared<Atom>();
  at->kind = Atom::Kind::InDist;
  at->a = a;
  at->b = b;
  at->sel = in_sel_;
  at->d_in = d_in_;
  at->bound = c_.kappa_in;
  at->text = "dIn(i[$a], i[$b]) <= " + c_.kappa_in.str();
  return atom(at);
}

LtlP Vocabulary::out_within(int a, int b) const
{
  auto at = std::make_shared<Atom>();
  at->kind = Atom::Kind::OutDist;
  at->a = a;
  at->b = b;
  at->sel = out_sel_;
  at->d_out = d_out_;
  at->bound = c_.kappa_out;
  at->text = "dOut(o[$a], o[$b]) <= " + c_.kappa_out.str();
  return atom(at);
}

LtlP Vocabulary::out_within_f(int a, int b) const
{
  auto at = std::make_shared<Atom>();
  at->kind = Atom::Kind::OutDistF;
  at->a = a;
  at->b = b;
  at->sel = out_sel_;
  at->sel2 = in_sel_;
  at->d_in = d_in_;
  at->d_out = d_out_;
  at->f = f_;
  at->text = "dOut(o[$a], o[$b]) <= f(dIn(i[$a], i[$b]))";
  return atom(at);
}

LtlP Vocabulary::input_is(int var, const Valuation & inputs) const
{
  if (inputs.size() != in_sel_.size())
    throw DataError("expected " + std::to_string(in_sel_.size()) + " input value(s)");
  for (size_t k = 0; k < in_sel_.size(); ++k)
    if (!sig_.signal(in_sel_[k]).domain.contains(inputs[k]))
      throw DataError("input value " + inputs[k].str() + " is not on the grid of '"
                      + sig_.signal(in_sel_[k]).name + "'");
  auto at = std::make_shared<Atom>();
  at->kind = Atom::Kind::Member;
  at->a = at->b = var;
  at->sel = in_sel_;
  at->allowed = std::make_shared<std::set<Valuation>>(std::set<Valuation>{inputs});
  std::string t = "i[$a] = ";
  t += inputs.size() == 1 ? inputs[0].str() : to_string(inputs);
  at->text = t;
  return atom(at);
}

Valuation Vocabulary::inputs_of(const std::vector<Value> & v) const
{
  if (v.size() != in_sel_.size())
    throw DataError("expected " + std::to_string(in_sel_.size()) + " input value(s)");
  return v;
}

LtlP Vocabulary::condition(Property p, int a, int b) const
{
  using namespace react;
  switch (p) {
    case Property::Clean: return ltl_globally(same(Role::Output, a, b));
    case Property::Robust: return ltl_weak_until(out_within(a, b), ltl_not(in_within(a, b)));
    case Property::FClean: return ltl_globally(out_within_f(a, b));
  }
  return ltl_const(true);
}

// ---- formulas

namespace {

LtlP premise(const Vocabulary & v)
{
  return react::ltl_and({v.pintrs(0), v.pintrs(1), v.stdin_(0)});
}

}  // namespace

std::vector<Characterization> characterizations(const Vocabulary & v, Property p)
{
  using namespace react;
  std::vector<Characterization> out;
  if (p == Property::Clean) {
    Characterization c;
    c.formula.prefix = {{Quant::Forall, "pi1"}, {Quant::Forall, "pi2"}, {Quant::Exists, "pi2'"}};
    c.formula.premise = premise(v);
    c.condition = v.condition(p, 0, 2);
    c.formula.body = ltl_and({v.same(Role::Param, 1, 2),
                              ltl_globally(ltl_and({v.same(Role::Input, 0, 2), v.same(Role::Output, 0, 2)}))});
    c.name = "characterization";
    c.exists_var = 2;
    c.param_from = 1;
    c.input_from = 0;
    out.push_back(std::move(c));
    return out;
  }
  {
    Characterization c;
    c.formula.prefix = {{Quant::Forall, "pi1"}, {Quant::Forall, "pi2"}, {Quant::Exists, "pi2'"}};
    c.formula.premise = premise(v);
    c.condition = v.condition(p, 0, 2);
    c.formula.body = ltl_and({v.same(Role::Param, 1, 2), ltl_globally(v.same(Role::Input, 1, 2)), c.condition});
    c.name = "characterization-left";
    c.exists_var = 2;
    c.param_from = 1;
    c.input_from = 1;
    out.push_back(std::move(c));
  }
  {
    Characterization c;
    c.formula.prefix = {{Quant::Forall, "pi1"}, {Quant::Forall, "pi2"}, {Quant::Exists, "pi1'"}};
    c.formula.premise = premise(v);
    c.condition = v.condition(p, 2, 1);
    c.formula.body = ltl_and({v.same(Role::Param, 0, 2), ltl_globally(v.same(Role::Input, 0, 2)), c.condition});
    c.name = "characterization-right";
    c.exists_var = 2;
    c.param_from = 0;
    c.input_from = 0;
    out.push_back(std::move(c));
  }
  return out;
}

HyperFormula strengthened(const Vocabulary & v, Property p)
{
  using namespace react;
  HyperFormula f;
  f.prefix = {{Quant::Forall, "pi1"}, {Quant::Forall, "pi2"}};
  f.premise = premise(v);
  if (p == Property::Clean)
    // only pairs that read the same inputs are compared
    f.body = ltl_weak_until(v.same(Role::Output, 0, 1), ltl_not(v.same(Role::Input, 0, 1)));
  else
    f.body = v.condition(p, 0, 1);
  return f;
}

HyperFormula negation_instance(const Vocabulary & v, Property p, Side s, const Valuation & a,
                               const Valuation & b)
{
  using namespace react;
  if (p == Property::Clean)
    throw UnsupportedError("negation instances are defined for robust and fclean only");
  HyperFormula f;
  auto cs = characterizations(v, p);
  const Characterization & c = cs[s == Side::Left ? 0 : 1];
  f.prefix = c.formula.prefix;
  f.prefix[2].first = Quant::Forall;
  f.premise = ltl_globally(ltl_and({v.input_is(0, a), v.input_is(1, b)}));
  f.body = ltl_not(ltl_implies(c.formula.premise, c.formula.body));
  return f;
}

HyperFormula guarantee(const Vocabulary & v, const Valuation & a, const Valuation & b)
{
  using namespace react;
  HyperFormula f;
  f.prefix = {{Quant::Exists, "pi1"}, {Quant::Exists, "pi2"}};
  f.premise = ltl_const(true);
  f.body = ltl_globally(ltl_and({v.input_is(0, a), v.input_is(1, b)}));
  return f;
}

// ---- bit-level expansion

namespace {

using react::ltl_and;
using react::ltl_const;
using react::ltl_not;
using react::ltl_or;

LtlP bit(const Signature & sig, size_t signal, unsigned k, int var)
{
  auto a = std::make_shared<Atom>();
  a->kind = Atom::Kind::Bit;
  a->a = a->b = var;
  a->sel = {signal};
  a->bit = int(k);
  a->dom = std::make_shared<Domain>(sig.signal(signal).domain);
  a->text = sig.signal(signal).name + "." + std::to_string(k) + "[$a]";
  return react::ltl_atom(a);
}

// every bit of the selected signals fixed to the code of v
LtlP minterm(const Signature & sig, const std::vector<size_t> & sel, const Valuation & v, int var)
{
  std::vector<LtlP> lits;
  for (size_t j = 0; j < sel.size(); ++j) {
    const react::Signal & s = sig.signal(sel[j]);
    size_t code = s.domain.index_of(v[j]);
    for (unsigned k = 0; k < s.width; ++k) {
      LtlP b = bit(sig, sel[j], k, var);
      lits.push_back(code >> k & 1 ? b : ltl_not(b));
    }
  }
  return ltl_and(std::move(lits));
}

std::vector<Valuation> grid(const Signature & sig, const std::vector<size_t> & sel)
{
  std::vector<const Domain *> doms;
  for (size_t k : sel) doms.push_back(&sig.signal(k).domain);
  return product(doms);
}

LtlP expand_atom(const Signature & sig, const Atom & a)
{
  switch (a.kind) {
    case Atom::Kind::State:
    case Atom::Kind::Bit: return nullptr;
    case Atom::Kind::Equal: {
      std::vector<LtlP> xs;
      for (size_t s : a.sel)
        for (unsigned k = 0; k < sig.signal(s).width; ++k) {
          LtlP x = bit(sig, s, k, a.a), y = bit(sig, s, k, a.b);
          xs.push_back(ltl_or({ltl_and({x, y}), ltl_and({ltl_not(x), ltl_not(y)})}));
        }
      return ltl_and(std::move(xs));
    }
    case Atom::Kind::Member: {
      std::vector<LtlP> xs;
      for (auto & v : *a.allowed) xs.push_back(minterm(sig, a.sel, v, a.a));
      return ltl_or(std::move(xs));
    }
    case Atom::Kind::InDist:
    case Atom::Kind::OutDist: {
      const Distance & d = a.kind == Atom::Kind::InDist ? *a.d_in : *a.d_out;
      auto g = grid(sig, a.sel);
      std::vector<LtlP> xs;
      for (auto & x : g)
        for (auto & y : g)
          if (d(x, y) <= a.bound)
            xs.push_back(ltl_and({minterm(sig, a.sel, x, a.a), minterm(sig, a.sel, y, a.b)}));
      return ltl_or(std::move(xs));
    }
    case Atom::Kind::OutDistF: {
      auto go = grid(sig, a.sel), gi = grid(sig, a.sel2);
      std::vector<LtlP> xs;
      for (auto & i : gi)
        for (auto & i2 : gi) {
          Value bound = (*a.f)((*a.d_in)(i, i2));
          for (auto & o : go)
            for (auto & o2 : go)
              if ((*a.d_out)(o, o2) <= bound)
                xs.push_back(ltl_and({minterm(sig, a.sel2, i, a.a), minterm(sig, a.sel2, i2, a.b),
                                      minterm(sig, a.sel, o, a.a), minterm(sig, a.sel, o2, a.b)}));
        }
      return ltl_or(std::move(xs));
    }
  }
  return nullptr;
}

}  // namespace

LtlP expand_bits(const Signature & sig, const LtlP & f)
{
  if (f->op == Ltl::Op::Atom) {
    LtlP e = expand_atom(sig, *f->atom);
    return e ? e : f;
  }
  if (f->args.empty()) return f;
  auto g = std::make_shared<Ltl>(*f);
  for (auto & a : g->args) a = expand_bits(sig, a);
  return g;
}

}  // namespace dope::hyper
