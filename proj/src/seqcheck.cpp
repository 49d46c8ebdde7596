#include "dope/seqcheck.h"

#include <algorithm>
#include <map>

#include "dope/errors.h"
#include "dope/hausdorff.h"
#include "dope/lang/parser.h"
#include "dope/parallel.h"

namespace dope {

using lang::Program;
using lang::Role;

const char * property_name(SeqProperty p)
{
  switch (p) {
    case SeqProperty::Clean: return "clean";
    case SeqProperty::Robust: return "robust";
    case SeqProperty::FClean: return "fclean";
    case SeqProperty::General: return "general";
  }
  return "?";
}

SeqProperty parse_seq_property(const std::string & s)
{
  if (s == "clean") return SeqProperty::Clean;
  if (s == "robust") return SeqProperty::Robust;
  if (s == "fclean") return SeqProperty::FClean;
  if (s == "general") return SeqProperty::General;
  throw DataError("unknown property '" + s + "'");
}

lang::ExprP role_predicate(const Program & p, Role role, const std::string & text)
{
  auto slots = p.of_role(role);
  lang::NameResolver names = [&](const std::string & n) {
    for (size_t k = 0; k < slots.size(); ++k)
      if (p.decls[slots[k]].name == n) return int(k);
    int other = p.find(n);
    if (other >= 0)
      throw SemanticError(n, "predicate over " + std::string(lang::role_name(role))
                                 + " variables mentions " + lang::role_name(p.decls[other].role)
                                 + " '" + n + "'");
    return -1;
  };
  lang::ExprP e = lang::parse_expr(text, names);
  if (!lang::is_boolean(e->op)) throw DataError("predicate '" + text + "' is not a condition");
  return e;
}

namespace {

std::vector<Valuation> enumerate_role(const Program & p, Role role)
{
  std::vector<const Domain *> doms;
  for (size_t k : p.of_role(role)) {
    const lang::Decl & d = p.decls[k];
    if (d.domain.exact())
      throw DataError(std::string(lang::role_name(role)) + " '" + d.name
                      + "' needs a declared grid to be enumerated");
    doms.push_back(&d.domain);
  }
  return product(doms);
}

bool holds(const lang::ExprP & pred, const Valuation & v)
{
  lang::Env env{v.data(), nullptr};
  return lang::eval_bool(*pred, env);
}

}  // namespace

std::vector<Valuation> parameter_space(const Program & p, const Contract & c)
{
  auto slots = p.of_role(Role::Param);
  if (c.pintrs.valuations) {
    std::vector<Valuation> out;
    for (auto & m : *c.pintrs.valuations) {
      Valuation v;
      for (size_t k : slots) {
        const lang::Decl & d = p.decls[k];
        auto it = m.find(d.name);
        if (it == m.end()) throw DataError("pintrs entry lacks parameter '" + d.name + "'");
        if (!d.domain.exact() && !d.domain.contains(it->second))
          throw DataError("pintrs value " + it->second.str() + " of '" + d.name
                          + "' is not on its grid");
        v.push_back(it->second);
      }
      for (auto & [name, val] : m)
        if (p.find(name) < 0 || p.decls[p.find(name)].role != Role::Param)
          throw DataError("pintrs names unknown parameter '" + name + "'");
      out.push_back(std::move(v));
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  }
  auto pred = role_predicate(p, Role::Param, c.pintrs.predicate);
  std::vector<Valuation> out;
  for (auto & v : enumerate_role(p, Role::Param))
    if (holds(pred, v)) out.push_back(v);
  return out;
}

SeqChecker::SeqChecker(const Program & prog, const Contract & c, SeqOptions opts)
    : prog_(prog), c_(c), opts_(opts)
{
  params_ = parameter_space(prog, c);
  inputs_ = enumerate_role(prog, Role::Input);
  auto std_pred = role_predicate(prog, Role::Input, c.stdin_spec);
  auto comm_pred = role_predicate(prog, Role::Input, c.comm.value_or("false"));
  for (auto & i : inputs_) {
    stdin_.push_back(holds(std_pred, i));
    comm_.push_back(holds(comm_pred, i));
    if (stdin_.back() && comm_.back())
      throw DataError("contract: Comm and StdIn share the input " + to_string(i));
  }
  cache_.resize(params_.size() * inputs_.size());
}

std::vector<std::string> SeqChecker::param_names() const
{
  std::vector<std::string> out;
  for (size_t k : prog_.of_role(Role::Param)) out.push_back(prog_.decls[k].name);
  return out;
}

std::vector<std::string> SeqChecker::input_names() const
{
  std::vector<std::string> out;
  for (size_t k : prog_.of_role(Role::Input)) out.push_back(prog_.decls[k].name);
  return out;
}

std::vector<std::string> SeqChecker::output_names() const
{
  std::vector<std::string> out;
  for (size_t k : prog_.of_role(Role::Output)) out.push_back(prog_.decls[k].name);
  return out;
}

void SeqChecker::prepare(const std::vector<size_t> & input_idx)
{
  std::vector<size_t> todo;
  for (size_t p = 0; p < params_.size(); ++p)
    for (size_t i : input_idx)
      if (!cache_[p * inputs_.size() + i]) todo.push_back(p * inputs_.size() + i);
  parallel_for(todo.size(), [&](size_t k) {
    size_t cell = todo[k];
    cache_[cell] = lang::eval(prog_, params_[cell / inputs_.size()],
                              inputs_[cell % inputs_.size()], opts_.budget);
  });
  evals_ += todo.size();
}

const lang::Outcome & SeqChecker::outcome(size_t p, size_t i)
{
  auto & slot = cache_[p * inputs_.size() + i];
  if (!slot) prepare({i});
  return *slot;
}

std::vector<Valuation> SeqChecker::outs(const lang::Outcome & o) const
{
  return {o.outputs.begin(), o.outputs.end()};
}

namespace {

void collect_warnings(const std::vector<std::optional<lang::Outcome>> & cache,
                      std::vector<std::string> & out)
{
  std::set<std::string> seen;
  for (auto & o : cache)
    if (o)
      for (auto & w : o->warnings)
        if (seen.insert(w).second && out.size() < 20) out.push_back(w);
}

}  // namespace

SeqVerdict SeqChecker::clean()
{
  SeqVerdict v;
  std::vector<size_t> idx;
  for (size_t i = 0; i < inputs_.size(); ++i)
    if (stdin_[i]) idx.push_back(i);
  prepare(idx);
  for (size_t p = 0; p < params_.size(); ++p)
    for (size_t p2 = 0; p2 < params_.size(); ++p2)
      for (size_t i : idx) {
        ++v.tuples;
        const auto & a = outcome(p, i);
        const auto & b = outcome(p2, i);
        if (a == b) continue;
        // an output missing on a complete side cannot appear later
        bool differ = false;
        if (!b.diverged)
          for (auto & o : a.outputs) differ = differ || !b.outputs.count(o);
        if (!a.diverged)
          for (auto & o : b.outputs) differ = differ || !a.outputs.count(o);
        if (!a.diverged && !b.diverged) differ = true;
        if (!differ) {
          if (v.status == Status::Clean) {
            v.status = Status::Unknown;
            v.reason = "budget exhausted on one side for p=" + to_string(params_[p])
                       + ", p'=" + to_string(params_[p2]) + ", i=" + to_string(inputs_[i]);
          }
          continue;
        }
        v.status = Status::Doped;
        v.reason = "output sets differ on a standard input";
        v.witness = SeqWitness{params_[p], params_[p2], inputs_[i], inputs_[i],
                               outs(a), outs(b), a.diverged, b.diverged,
                               Value(), Value(), 0};
        v.evals = evals_;
        return v;
      }
  v.evals = evals_;
  collect_warnings(cache_, v.warnings);
  return v;
}

SeqVerdict SeqChecker::bounded(bool robust_mode, bool comm_only)
{
  if (!robust_mode && !c_.f) throw DataError("contract has no bounding function f");
  SeqVerdict v;
  size_t n = inputs_.size();
  // bound for each (i, i') pair, inf meaning unconstrained
  auto bound_of = [&](size_t i, size_t i2) {
    Value d = c_.d_in(inputs_[i], inputs_[i2]);
    if (robust_mode) return d <= c_.kappa_in ? c_.kappa_out : Value::infinity();
    return (*c_.f)(d);
  };
  std::vector<Value> bounds(n * n, Value::infinity());
  std::vector<bool> needed(n, false);
  for (size_t i = 0; i < n; ++i) {
    if (!stdin_[i]) continue;
    for (size_t i2 = 0; i2 < n; ++i2) {
      if (comm_only && !comm_[i2]) continue;
      bounds[i * n + i2] = bound_of(i, i2);
      if (!bounds[i * n + i2].is_inf()) needed[i] = needed[i2] = true;
    }
  }
  std::vector<size_t> idx;
  for (size_t i = 0; i < n; ++i)
    if (needed[i]) idx.push_back(i);
  prepare(idx);

  for (size_t p = 0; p < params_.size(); ++p)
    for (size_t p2 = 0; p2 < params_.size(); ++p2)
      for (size_t i = 0; i < n; ++i) {
        if (!stdin_[i]) continue;
        for (size_t i2 = 0; i2 < n; ++i2) {
          const Value & bound = bounds[i * n + i2];
          if (bound.is_inf()) continue;
          ++v.tuples;
          const auto & a = outcome(p, i);
          const auto & b = outcome(p2, i2);
          if (a.diverged || b.diverged) {
            if (v.status == Status::Clean) {
              v.status = Status::Unknown;
              v.reason = "budget exhausted for p=" + to_string(params_[p]) + ", p'="
                         + to_string(params_[p2]) + ", i=" + to_string(inputs_[i])
                         + ", i'=" + to_string(inputs_[i2]);
            }
            continue;
          }
          auto A = outs(a), B = outs(b);
          Value h = hausdorff(c_.d_out, A, B);
          if (h <= bound) continue;
          v.status = Status::Doped;
          v.reason = "output distance " + h.str() + " exceeds " + bound.str();
          v.witness = SeqWitness{params_[p], params_[p2], inputs_[i], inputs_[i2],
                                 A, B, false, false, h, bound, 0};
          v.evals = evals_;
          return v;
        }
      }
  v.evals = evals_;
  collect_warnings(cache_, v.warnings);
  return v;
}

SeqVerdict SeqChecker::robust() { return bounded(true, false); }

SeqVerdict SeqChecker::f_clean() { return bounded(false, false); }

SeqVerdict SeqChecker::general()
{
  SeqVerdict v1 = clean();
  if (v1.status == Status::Doped) {
    v1.witness->item = 1;
    return v1;
  }
  SeqVerdict v2;
  if (std::find(comm_.begin(), comm_.end(), true) != comm_.end()) {
    v2 = bounded(false, true);
    if (v2.status == Status::Doped) {
      v2.witness->item = 2;
      v2.tuples += v1.tuples;
      return v2;
    }
  }

  SeqVerdict v;
  v.tuples = v1.tuples + v2.tuples;
  if (v1.status == Status::Unknown) {
    v.status = Status::Unknown;
    v.reason = "item 1: " + v1.reason;
  } else if (v2.status == Status::Unknown) {
    v.status = Status::Unknown;
    v.reason = "item 2: " + v2.reason;
  }

  // item 3, sampled: inputs outside StdIn and Comm against inputs at the
  // finest distance the grid realises
  size_t n = inputs_.size();
  std::optional<Value> delta;
  for (size_t a = 0; a < n; ++a)
    for (size_t b = a + 1; b < n; ++b) {
      Value d = c_.d_in(inputs_[a], inputs_[b]);
      if (Value() < d && (!delta || d < *delta)) delta = d;
    }
  std::vector<std::pair<size_t, size_t>> samples;  // (i, i')
  for (size_t i2 = 0; i2 < n; ++i2) {
    if (stdin_[i2] || comm_[i2]) continue;
    for (size_t i = 0; i < n; ++i)
      if (c_.d_in(inputs_[i], inputs_[i2]) <= delta.value_or(Value())) samples.push_back({i, i2});
  }
  std::sort(samples.begin(), samples.end());
  std::vector<size_t> idx;
  for (auto [i, i2] : samples) idx.push_back(i), idx.push_back(i2);
  std::sort(idx.begin(), idx.end());
  idx.erase(std::unique(idx.begin(), idx.end()), idx.end());
  prepare(idx);

  std::optional<SeqWitness> worst;
  bool partial = false;
  for (size_t p = 0; p < params_.size(); ++p)
    for (size_t p2 = 0; p2 < params_.size(); ++p2)
      for (auto [i, i2] : samples) {
        ++v.tuples;
        const auto & a = outcome(p, i);
        const auto & b = outcome(p2, i2);
        if (a.diverged || b.diverged) {
          partial = true;
          continue;
        }
        auto A = outs(a), B = outs(b);
        Value h = hausdorff(c_.d_out, A, B);
        if (!worst || worst->measured < h)
          worst = SeqWitness{params_[p], params_[p2], inputs_[i], inputs_[i2],
                             A, B, false, false, h, opts_.continuity_eps.value_or(Value()), 3};
      }
  v.evals = evals_;
  collect_warnings(cache_, v.warnings);
  if (worst) {
    v.continuity = worst->measured;
    v.resolution = delta;
  }
  if (worst && opts_.continuity_eps && *opts_.continuity_eps <= worst->measured) {
    v.status = Status::Doped;
    v.reason = "item 3: output jump " + worst->measured.str() + " at input distance "
               + delta->str() + " reaches epsilon " + opts_.continuity_eps->str();
    v.witness = worst;
    return v;
  }
  if (v.status == Status::Unknown) return v;
  if (!samples.empty()) {
    v.status = Status::Unknown;
    v.reason = "continuity-report: items 1-2 hold; item 3 sampled only";
    if (worst)
      v.reason += ", largest output distance " + worst->measured.str()
                  + " at input distance " + delta->str();
    if (partial) v.reason += " (some samples exhausted the budget)";
  }
  return v;
}

SeqVerdict SeqChecker::check(SeqProperty prop)
{
  switch (prop) {
    case SeqProperty::Clean: return clean();
    case SeqProperty::Robust: return robust();
    case SeqProperty::FClean: return f_clean();
    case SeqProperty::General: return general();
  }
  return {};
}

SeqVerdict check_clean(const Program & p, const Contract & c, const SeqOptions & o)
{
  return SeqChecker(p, c, o).clean();
}

SeqVerdict check_robustly_clean(const Program & p, const Contract & c, const SeqOptions & o)
{
  return SeqChecker(p, c, o).robust();
}

SeqVerdict check_f_clean(const Program & p, const Contract & c, const SeqOptions & o)
{
  return SeqChecker(p, c, o).f_clean();
}

SeqVerdict check_general_clean(const Program & p, const Contract & c, const SeqOptions & o)
{
  return SeqChecker(p, c, o).general();
}

bool replay_witness(const Program & p, const Contract & c, SeqProperty prop,
                    const SeqWitness & w, size_t budget)
{
  lang::Outcome a = lang::eval(p, w.p, w.i, budget);
  lang::Outcome b = lang::eval(p, w.p2, w.i2, budget);
  if (std::vector<Valuation>(a.outputs.begin(), a.outputs.end()) != w.out1
      || std::vector<Valuation>(b.outputs.begin(), b.outputs.end()) != w.out2)
    return false;
  auto std_pred = role_predicate(p, Role::Input, c.stdin_spec);
  auto comm_pred = role_predicate(p, Role::Input, c.comm.value_or("false"));
  auto params = parameter_space(p, c);
  auto admitted = [&](const Valuation & v) {
    return std::binary_search(params.begin(), params.end(), v);
  };
  if (!admitted(w.p) || !admitted(w.p2)) return false;
  if (prop == SeqProperty::Clean || (prop == SeqProperty::General && w.item == 1))
  {
    auto missing = [](const lang::Outcome & x, const lang::Outcome & y) {
      if (y.diverged) return false;
      for (auto & o : x.outputs)
        if (!y.outputs.count(o)) return true;
      return false;
    };
    bool differ = (!a.diverged && !b.diverged && !(a == b)) || missing(a, b) || missing(b, a);
    return w.i == w.i2 && holds(std_pred, w.i) && differ;
  }
  Value h = hausdorff(c.d_out, w.out1, w.out2);
  Value d = c.d_in(w.i, w.i2);
  switch (prop) {
    case SeqProperty::Robust:
      return holds(std_pred, w.i) && d <= c.kappa_in && c.kappa_out < h;
    case SeqProperty::FClean: return holds(std_pred, w.i) && c.f && (*c.f)(d) < h;
    case SeqProperty::General:
      if (w.item == 2)
        return holds(std_pred, w.i) && holds(comm_pred, w.i2) && c.f && (*c.f)(d) < h;
      return !holds(std_pred, w.i2) && !holds(comm_pred, w.i2) && w.bound <= h;
    default: return false;
  }
}

}  // namespace dope
