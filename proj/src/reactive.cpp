#include "dope/reactive.h"

#include <algorithm>
#include <fstream>
#include <functional>
#include <map>
#include <numeric>
#include <set>
#include <unordered_map>

#include "dope/errors.h"
#include "dope/lang/parser.h"

namespace dope::react {

using nlohmann::json;

namespace {

int role_slot(Role r)
{
  if (r == Role::Local) throw DataError("signals are parameters, inputs or outputs");
  return int(r);
}

const char * role_word(Role r)
{
  switch (r) {
    case Role::Param: return "param";
    case Role::Input: return "input";
    case Role::Output: return "output";
    default: return "local";
  }
}

Role parse_role(const std::string & s)
{
  if (s == "param") return Role::Param;
  if (s == "input") return Role::Input;
  if (s == "output") return Role::Output;
  throw DataError("unknown signal role '" + s + "'");
}

}  // namespace

size_t Signature::add(const std::string & name, Role role, const Domain & domain)
{
  int slot = role_slot(role);
  if (find(name) >= 0) throw DataError("duplicate signal '" + name + "'");
  if (domain.exact() || domain.size() == 0)
    throw DataError("signal '" + name + "' needs a finite grid");
  Signal s;
  s.name = name;
  s.role = role;
  s.domain = domain;
  s.width = 1;
  while ((size_t(1) << s.width) < domain.size()) ++s.width;
  s.first_bit = ap_names_.size();
  for (unsigned b = 0; b < s.width; ++b) ap_names_.push_back(name + "." + std::to_string(b));
  roles_[slot].push_back(signals_.size());
  signals_.push_back(std::move(s));
  return signals_.size() - 1;
}

int Signature::find(const std::string & name) const
{
  for (size_t k = 0; k < signals_.size(); ++k)
    if (signals_[k].name == name) return int(k);
  return -1;
}

const std::vector<size_t> & Signature::of_role(Role r) const { return roles_[role_slot(r)]; }

int Signature::find_ap(const std::string & name) const
{
  for (size_t k = 0; k < ap_names_.size(); ++k)
    if (ap_names_[k] == name) return int(k);
  return -1;
}

Label Signature::ap_mask(Role r) const
{
  Label m(ap_count(), false);
  for (size_t k : of_role(r))
    for (unsigned b = 0; b < signals_[k].width; ++b) m[signals_[k].first_bit + b] = true;
  return m;
}

Label Signature::encode(const Valuation & v) const
{
  if (v.size() != signals_.size()) throw DataError("valuation does not match the signals");
  Label l(ap_count(), false);
  for (size_t k = 0; k < signals_.size(); ++k) {
    const Signal & s = signals_[k];
    if (!s.domain.contains(v[k]))
      throw DataError("value " + v[k].str() + " of '" + s.name + "' is not on its grid "
                      + s.domain.str());
    size_t code = s.domain.index_of(v[k]);
    for (unsigned b = 0; b < s.width; ++b) l[s.first_bit + b] = code >> b & 1;
  }
  return l;
}

Valuation Signature::decode(const Label & l) const
{
  if (l.size() != ap_count()) throw DataError("label does not match the propositions");
  Valuation v;
  for (const Signal & s : signals_) {
    size_t code = 0;
    for (unsigned b = 0; b < s.width; ++b)
      if (l[s.first_bit + b]) code |= size_t(1) << b;
    if (code >= s.domain.size())
      throw DataError("code " + std::to_string(code) + " of '" + s.name + "' is off its grid");
    v.push_back(s.domain.points()[code]);
  }
  return v;
}

size_t Signature::letter_count(Role r) const
{
  size_t n = 1;
  for (size_t k : of_role(r)) n *= signals_[k].domain.size();
  return n;
}

uint32_t Signature::letter(const Valuation & v, Role r) const
{
  size_t idx = 0;
  for (size_t k : of_role(r)) idx = idx * signals_[k].domain.size() + signals_[k].domain.index_of(v[k]);
  return uint32_t(idx);
}

Valuation Signature::letter_values(Role r, uint32_t letter) const
{
  Valuation v;
  for (const Signal & s : signals_) v.push_back(s.domain.points()[0]);
  const auto & ks = of_role(r);
  for (size_t j = ks.size(); j-- > 0;) {
    const Domain & d = signals_[ks[j]].domain;
    v[ks[j]] = d.points()[letter % d.size()];
    letter /= d.size();
  }
  return v;
}

bool Signature::operator==(const Signature & o) const
{
  if (signals_.size() != o.signals_.size()) return false;
  for (size_t k = 0; k < signals_.size(); ++k)
    if (signals_[k].name != o.signals_[k].name || signals_[k].role != o.signals_[k].role
        || !(signals_[k].domain == o.signals_[k].domain))
      return false;
  return true;
}

uint32_t TransitionSystem::add_state(Valuation values)
{
  sig_.encode(values);  // validates
  values_.push_back(std::move(values));
  succ_.emplace_back();
  final_ = false;
  return uint32_t(values_.size() - 1);
}

void TransitionSystem::add_initial(uint32_t s)
{
  if (s >= size()) throw DataError("initial state " + std::to_string(s) + " does not exist");
  init_.push_back(s);
  final_ = false;
}

void TransitionSystem::add_edge(uint32_t from, uint32_t to)
{
  if (from >= size() || to >= size())
    throw DataError("transition " + std::to_string(from) + " -> " + std::to_string(to)
                    + " refers to a missing state");
  succ_[from].push_back(to);
  final_ = false;
}

void TransitionSystem::finalize()
{
  if (init_.empty()) throw DataError("model has no initial state");
  std::sort(init_.begin(), init_.end());
  init_.erase(std::unique(init_.begin(), init_.end()), init_.end());
  pred_.assign(size(), {});
  for (int r = 0; r < 3; ++r) letters_[r].assign(size(), 0);
  for (uint32_t s = 0; s < size(); ++s) {
    auto & v = succ_[s];
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    if (v.empty()) throw DataError("state " + std::to_string(s) + " has no successor");
    for (int r = 0; r < 3; ++r) letters_[r][s] = sig_.letter(values_[s], Role(r));
  }
  for (uint32_t s = 0; s < size(); ++s)
    for (uint32_t t : succ_[s]) {
      if (letters_[0][s] != letters_[0][t])
        throw DataError("parameters change on transition " + std::to_string(s) + " -> "
                        + std::to_string(t));
      pred_[t].push_back(s);
    }
  final_ = true;
}

size_t TransitionSystem::edge_count() const
{
  size_t n = 0;
  for (auto & v : succ_) n += v.size();
  return n;
}

uint32_t TransitionSystem::letter(uint32_t s, Role r) const
{
  if (!final_) throw DopeError("transition system used before finalize()");
  return letters_[role_slot(r)][s];
}

std::vector<uint32_t> TransitionSystem::reachable() const
{
  std::vector<bool> seen(size(), false);
  std::vector<uint32_t> order;
  for (uint32_t s : init_)
    if (!seen[s]) seen[s] = true, order.push_back(s);
  for (size_t k = 0; k < order.size(); ++k)
    for (uint32_t t : succ_[order[k]])
      if (!seen[t]) seen[t] = true, order.push_back(t);
  std::sort(order.begin(), order.end());
  return order;
}

bool TransitionSystem::receptive() const
{
  size_t n_in = sig_.letter_count(Role::Input);
  std::map<uint32_t, std::set<uint32_t>> first;
  for (uint32_t s : init_) first[letter(s, Role::Param)].insert(letter(s, Role::Input));
  for (auto & [p, ins] : first)
    if (ins.size() != n_in) return false;
  for (uint32_t s : reachable()) {
    std::set<uint32_t> ins;
    for (uint32_t t : succ_[s]) ins.insert(letter(t, Role::Input));
    if (ins.size() != n_in) return false;
  }
  return true;
}

bool TransitionSystem::deterministic() const
{
  std::set<std::pair<uint32_t, uint32_t>> first;
  for (uint32_t s : init_)
    if (!first.insert({letter(s, Role::Param), letter(s, Role::Input)}).second) return false;
  for (uint32_t s = 0; s < size(); ++s) {
    std::set<uint32_t> ins;
    for (uint32_t t : succ_[s])
      if (!ins.insert(letter(t, Role::Input)).second) return false;
  }
  return true;
}

// ---- lassos

const Label & Lasso::at(size_t k) const
{
  if (loop.empty()) throw DopeError("lasso with an empty loop");
  return k < stem.size() ? stem[k] : loop[(k - stem.size()) % loop.size()];
}

Lasso Lasso::suffix(size_t k) const
{
  if (k <= stem.size()) return {{stem.begin() + k, stem.end()}, loop};
  size_t r = (k - stem.size()) % loop.size();
  Lasso t;
  t.loop.insert(t.loop.end(), loop.begin() + r, loop.end());
  t.loop.insert(t.loop.end(), loop.begin(), loop.begin() + r);
  return t;
}

std::vector<Label> Lasso::prefix(size_t k) const
{
  std::vector<Label> out;
  for (size_t j = 0; j <= k; ++j) out.push_back(at(j));
  return out;
}

Lasso normalize(const Lasso & t)
{
  Lasso r = t;
  size_t p = r.loop.size();
  for (size_t d = 1; d < p; ++d) {
    if (p % d) continue;
    bool periodic = true;
    for (size_t k = d; k < p && periodic; ++k) periodic = r.loop[k] == r.loop[k - d];
    if (periodic) {
      r.loop.resize(d);
      break;
    }
  }
  while (!r.stem.empty() && r.stem.back() == r.loop.back()) {
    r.stem.pop_back();
    std::rotate(r.loop.rbegin(), r.loop.rbegin() + 1, r.loop.rend());
  }
  return r;
}

bool same_word(const Lasso & a, const Lasso & b) { return normalize(a) == normalize(b); }

Label intersect(const Label & a, const Label & b)
{
  Label r(a.size(), false);
  for (size_t k = 0; k < a.size(); ++k) r[k] = a[k] && b[k];
  return r;
}

Label project(const Label & l, const Label & mask) { return intersect(l, mask); }

Lasso project(const Lasso & t, const Label & mask)
{
  Lasso r;
  for (auto & l : t.stem) r.stem.push_back(intersect(l, mask));
  for (auto & l : t.loop) r.loop.push_back(intersect(l, mask));
  return r;
}

Lasso to_lasso(const TransitionSystem & ts, const Run & r)
{
  Lasso t;
  for (uint32_t s : r.stem) t.stem.push_back(ts.label(s));
  for (uint32_t s : r.loop) t.loop.push_back(ts.label(s));
  return t;
}

const Valuation & run_at(const TransitionSystem & ts, const Run & r, size_t k)
{
  uint32_t s = k < r.stem.size() ? r.stem[k] : r.loop[(k - r.stem.size()) % r.loop.size()];
  return ts.values(s);
}

// ---- outputs for a parameter and an input trace

OutputTraces as_function(const TransitionSystem & ts, const Label & params, const Lasso & inputs)
{
  const Signature & sig = ts.signature();
  OutputTraces o;
  o.ts_ = &ts;
  o.stem_ = inputs.stem.size();
  o.span_ = inputs.span();
  o.out_mask_ = sig.ap_mask(Role::Output);
  if (inputs.loop.empty()) throw DataError("input trace needs a nonempty loop");
  Label pm = sig.ap_mask(Role::Param), im = sig.ap_mask(Role::Input);
  uint32_t p_letter = sig.letter(sig.decode(intersect(params, pm)), Role::Param);
  std::vector<uint32_t> in_letter;
  for (size_t k = 0; k < o.span_; ++k)
    in_letter.push_back(sig.letter(sig.decode(intersect(inputs.at(k), im)), Role::Input));

  auto next = [&](size_t pos) { return pos + 1 < o.span_ ? pos + 1 : o.stem_; };
  auto ok = [&](uint32_t s, size_t pos) {
    return ts.letter(s, Role::Param) == p_letter && ts.letter(s, Role::Input) == in_letter[pos];
  };
  std::unordered_map<uint64_t, uint32_t> id;
  auto node = [&](uint32_t s, uint32_t pos) {
    uint64_t k = uint64_t(s) * o.span_ + pos;
    auto [it, fresh] = id.emplace(k, uint32_t(o.nodes_.size()));
    if (fresh) {
      o.nodes_.push_back({s, pos});
      o.succ_.emplace_back();
    }
    return std::pair{it->second, fresh};
  };
  std::vector<uint32_t> init, work;
  for (uint32_t s : ts.initial())
    if (ok(s, 0)) {
      auto [n, fresh] = node(s, 0);
      init.push_back(n);
      if (fresh) work.push_back(n);
    }
  while (!work.empty()) {
    uint32_t n = work.back();
    work.pop_back();
    auto [s, pos] = o.nodes_[n];
    uint32_t np = uint32_t(next(pos));
    for (uint32_t t : ts.succ(s))
      if (ok(t, np)) {
        auto [m, fresh] = node(t, np);
        o.succ_[n].push_back(m);
        if (fresh) work.push_back(m);
      }
  }
  // keep nodes with an infinite continuation
  std::vector<bool> live(o.nodes_.size(), true);
  for (bool changed = true; changed;) {
    changed = false;
    for (size_t n = 0; n < live.size(); ++n) {
      if (!live[n]) continue;
      bool any = false;
      for (uint32_t m : o.succ_[n]) any = any || live[m];
      if (!any) live[n] = false, changed = true;
    }
  }
  for (auto & v : o.succ_)
    v.erase(std::remove_if(v.begin(), v.end(), [&](uint32_t m) { return !live[m]; }), v.end());
  for (uint32_t n : init)
    if (live[n]) o.live_init_.push_back(n);
  o.live_count_ = std::count(live.begin(), live.end(), true);
  return o;
}

bool OutputTraces::contains(const Lasso & out) const
{
  if (empty() || out.loop.empty()) return false;
  const Signature & sig = ts_->signature();
  size_t ospan = out.span(), ostem = out.stem.size();
  std::vector<uint32_t> want;
  for (size_t k = 0; k < ospan; ++k)
    want.push_back(sig.letter(sig.decode(intersect(out.at(k), out_mask_)), Role::Output));
  auto onext = [&](size_t p) { return p + 1 < ospan ? p + 1 : ostem; };
  auto match = [&](uint32_t n, size_t p) { return ts_->letter(nodes_[n].s, Role::Output) == want[p]; };

  // product with the output lasso; infinite path from an initial node?
  std::unordered_map<uint64_t, uint32_t> id;
  std::vector<std::pair<uint32_t, uint32_t>> pn;
  std::vector<std::vector<uint32_t>> ps;
  std::vector<uint32_t> work, init;
  auto get = [&](uint32_t n, uint32_t p) {
    auto [it, fresh] = id.emplace(uint64_t(n) * ospan + p, uint32_t(pn.size()));
    if (fresh) {
      pn.push_back({n, p});
      ps.emplace_back();
      work.push_back(it->second);
    }
    return it->second;
  };
  for (uint32_t n : live_init_)
    if (match(n, 0)) init.push_back(get(n, 0));
  while (!work.empty()) {
    uint32_t x = work.back();
    work.pop_back();
    auto [n, p] = pn[x];
    uint32_t q = uint32_t(onext(p));
    for (uint32_t m : succ_[n])
      if (match(m, q)) {
        uint32_t y = get(m, q);
        ps[x].push_back(y);
      }
  }
  std::vector<bool> live(pn.size(), true);
  for (bool changed = true; changed;) {
    changed = false;
    for (size_t x = 0; x < live.size(); ++x) {
      if (!live[x]) continue;
      bool any = false;
      for (uint32_t y : ps[x]) any = any || live[y];
      if (!any) live[x] = false, changed = true;
    }
  }
  for (uint32_t x : init)
    if (live[x]) return true;
  return false;
}

std::vector<Lasso> OutputTraces::enumerate(size_t limit) const
{
  std::vector<Lasso> found;
  std::set<std::vector<std::vector<bool>>> seen;
  std::vector<uint32_t> path;
  std::vector<int> on_path(nodes_.size(), -1);
  size_t steps = 0;
  const size_t max_steps = 2000000;
  auto out_label = [&](uint32_t n) { return intersect(ts_->label(nodes_[n].s), out_mask_); };
  std::function<void(uint32_t)> dfs = [&](uint32_t n) {
    if (found.size() >= limit || ++steps > max_steps) return;
    on_path[n] = int(path.size());
    path.push_back(n);
    for (uint32_t m : succ_[n]) {
      if (found.size() >= limit) break;
      if (on_path[m] >= 0) {
        Lasso t;
        for (int k = 0; k < on_path[m]; ++k) t.stem.push_back(out_label(path[k]));
        for (size_t k = on_path[m]; k < path.size(); ++k) t.loop.push_back(out_label(path[k]));
        t = normalize(t);
        std::vector<std::vector<bool>> flat = t.stem;
        flat.push_back({});  // separator
        flat.insert(flat.end(), t.loop.begin(), t.loop.end());
        if (seen.insert(flat).second) found.push_back(t);
      } else {
        dfs(m);
      }
    }
    path.pop_back();
    on_path[n] = -1;
  };
  for (uint32_t n : live_init_) dfs(n);
  return found;
}

// ---- StdIn monitor

LtlP parse_role_formula(const Signature & sig, Role role, const std::string & text, int var)
{
  lang::ExprP e = lang::parse_expr(text, [&](const std::string & name) {
    int k = sig.find(name);
    if (k < 0) return -1;
    if (sig.signal(k).role != role)
      throw SemanticError(name, "'" + name + "' has role " + role_word(sig.signal(k).role)
                                    + "; only " + role_word(role) + " signals may appear here");
    return k;
  }, true);
  return from_expr(e, var);
}

Monitor::Monitor(const Signature & sig, const std::string & text)
    : formula_(parse_role_formula(sig, Role::Input, text, 0))
{
  build(sig);
}

Monitor::Monitor(const Signature & sig, LtlP formula) : formula_(std::move(formula)) { build(sig); }

void Monitor::build(const Signature & sig)
{
  SafetyAutomaton a(formula_);
  letters_ = sig.letter_count(Role::Input);
  std::vector<Valuation> vals;
  std::vector<uint64_t> masks;
  for (uint32_t l = 0; l < letters_; ++l) {
    vals.push_back(sig.letter_values(Role::Input, l));
    masks.push_back(a.mask({&vals.back()}));
  }
  std::unordered_map<uint32_t, uint32_t> local;
  std::vector<uint32_t> order;
  auto get = [&](uint32_t q) {
    auto [it, fresh] = local.emplace(q, uint32_t(order.size()));
    if (fresh) order.push_back(q);
    return it->second;
  };
  initial_ = get(a.initial());
  std::vector<std::vector<uint32_t>> rows;
  for (size_t k = 0; k < order.size(); ++k) {
    std::vector<uint32_t> row;
    for (uint32_t l = 0; l < letters_; ++l) row.push_back(get(a.step(order[k], masks[l])));
    rows.push_back(std::move(row));
  }
  delta_.clear();
  for (auto & r : rows) delta_.insert(delta_.end(), r.begin(), r.end());
  for (uint32_t q : order) texts_.push_back(a.state(q));
  live_.assign(order.size(), true);
  for (size_t k = 0; k < order.size(); ++k)
    if (order[k] == SafetyAutomaton::kFalse) live_[k] = false;
  for (bool changed = true; changed;) {
    changed = false;
    for (size_t q = 0; q < live_.size(); ++q) {
      if (!live_[q]) continue;
      bool any = false;
      for (uint32_t l = 0; l < letters_ && !any; ++l) any = live_[step(q, l)];
      if (!any) live_[q] = false, changed = true;
    }
  }
}

size_t Monitor::live_states() const { return std::count(live_.begin(), live_.end(), true); }

std::string Monitor::describe(uint32_t q) const
{
  if (!live_[q]) return "reject";
  return to_string(*texts_[q], {"t"});
}

bool Monitor::accepts(const std::vector<uint32_t> & stem, const std::vector<uint32_t> & loop) const
{
  uint32_t q = initial_;
  for (uint32_t l : stem) {
    q = step(q, l);
    if (!live_[q]) return false;
  }
  // iterate the loop until the state at the loop start repeats
  std::set<uint32_t> starts;
  while (starts.insert(q).second) {
    for (uint32_t l : loop) {
      q = step(q, l);
      if (!live_[q]) return false;
    }
  }
  return true;
}

Monitor stdin_monitor(const Signature & sig, const std::string & text) { return Monitor(sig, text); }

// ---- lasso semantics

namespace {

size_t lcm_capped(size_t a, size_t b)
{
  size_t l = a / std::gcd(a, b) * b;
  if (l > 1000000) throw UnsupportedError("lasso periods too large to align");
  return l;
}

}  // namespace

bool holds(const Ltl & f, const Signature & sig, const std::vector<const Lasso *> & traces,
           size_t pos)
{
  size_t stem = 0, period = 1;
  for (auto * t : traces) {
    if (t->loop.empty()) throw DataError("lasso with an empty loop");
    stem = std::max(stem, t->stem.size());
    period = lcm_capped(period, t->loop.size());
  }
  size_t n = stem + period;
  std::vector<std::vector<Valuation>> vals(traces.size());
  for (size_t i = 0; i < traces.size(); ++i)
    for (size_t k = 0; k < n; ++k) vals[i].push_back(sig.decode(traces[i]->at(k)));
  auto next = [&](size_t k) { return k + 1 < n ? k + 1 : stem; };

  using Op = Ltl::Op;
  std::unordered_map<const Ltl *, std::vector<char>> memo;
  std::function<const std::vector<char> &(const Ltl &)> ev = [&](const Ltl & g) -> const std::vector<char> & {
    auto it = memo.find(&g);
    if (it != memo.end()) return it->second;
    std::vector<char> v(n, 0);
    auto arg = [&](size_t k) -> const std::vector<char> & { return ev(*g.args[k]); };
    // least (until) or greatest (weak until) solution of v = b || (a && X v)
    auto fix = [&](const std::vector<char> & a, const std::vector<char> & b, bool greatest) {
      std::vector<char> r(n, greatest);
      for (bool changed = true; changed;) {
        changed = false;
        for (size_t k = n; k-- > 0;) {
          char x = b[k] || (a[k] && r[next(k)]);
          if (x != r[k]) r[k] = x, changed = true;
        }
      }
      return r;
    };
    switch (g.op) {
      case Op::True: v.assign(n, 1); break;
      case Op::False: break;
      case Op::Atom:
        for (size_t k = 0; k < n; ++k) {
          std::vector<const Valuation *> letters;
          for (auto & tv : vals) letters.push_back(&tv[k]);
          v[k] = g.atom->eval(letters);
        }
        break;
      case Op::Not: {
        auto & a = arg(0);
        for (size_t k = 0; k < n; ++k) v[k] = !a[k];
        break;
      }
      case Op::And:
      case Op::Or: {
        bool is_and = g.op == Op::And;
        v.assign(n, is_and);
        for (size_t j = 0; j < g.args.size(); ++j) {
          auto & a = arg(j);
          for (size_t k = 0; k < n; ++k) v[k] = is_and ? v[k] && a[k] : v[k] || a[k];
        }
        break;
      }
      case Op::Implies: {
        auto & a = arg(0);
        auto & b = arg(1);
        for (size_t k = 0; k < n; ++k) v[k] = !a[k] || b[k];
        break;
      }
      case Op::Next: {
        auto & a = arg(0);
        for (size_t k = 0; k < n; ++k) v[k] = a[next(k)];
        break;
      }
      case Op::Globally: v = fix(arg(0), std::vector<char>(n, 0), true); break;
      case Op::Finally: v = fix(std::vector<char>(n, 1), arg(0), false); break;
      case Op::Until: v = fix(arg(0), arg(1), false); break;
      case Op::WeakUntil: v = fix(arg(0), arg(1), true); break;
    }
    return memo.emplace(&g, std::move(v)).first->second;
  };
  const auto & r = ev(f);
  size_t k = pos < n ? pos : stem + (pos - stem) % period;
  return r[k];
}

bool eval_weak_until(const LtlP & phi, const LtlP & psi, const Signature & sig,
                     const std::vector<const Lasso *> & traces, size_t k)
{
  auto w = std::make_shared<Ltl>();
  w->op = Ltl::Op::WeakUntil;
  w->args = {phi, psi};
  return holds(*w, sig, traces, k);
}

// ---- JSON

json model_to_json(const TransitionSystem & ts)
{
  const Signature & sig = ts.signature();
  json j;
  j["signals"] = json::array();
  for (auto & s : sig.signals())
    j["signals"].push_back({{"name", s.name}, {"role", role_word(s.role)}, {"domain", s.domain.str()}});
  json ap = json::object();
  for (Role r : {Role::Param, Role::Input, Role::Output}) {
    json names = json::array();
    Label m = sig.ap_mask(r);
    for (size_t k = 0; k < m.size(); ++k)
      if (m[k]) names.push_back(sig.ap_name(k));
    ap[role_word(r)] = names;
  }
  j["ap"] = ap;
  j["states"] = json::array();
  for (uint32_t s = 0; s < ts.size(); ++s) {
    json vals = json::object();
    for (size_t k = 0; k < sig.signals().size(); ++k) vals[sig.signal(k).name] = ts.values(s)[k];
    json label = json::array();
    Label l = ts.label(s);
    for (size_t k = 0; k < l.size(); ++k)
      if (l[k]) label.push_back(sig.ap_name(k));
    j["states"].push_back({{"values", vals}, {"label", label}, {"succ", ts.succ(s)}});
  }
  j["initial"] = ts.initial();
  return j;
}

TransitionSystem model_from_json(const json & j)
{
  try {
    if (!j.is_object()) throw DataError("model must be a JSON object");
    Signature sig;
    for (auto & s : j.at("signals"))
      sig.add(s.at("name").get<std::string>(), parse_role(s.at("role").get<std::string>()),
              lang::parse_domain(s.at("domain").get<std::string>()));
    if (j.contains("ap")) {
      for (Role r : {Role::Param, Role::Input, Role::Output}) {
        std::vector<std::string> want, got;
        Label m = sig.ap_mask(r);
        for (size_t k = 0; k < m.size(); ++k)
          if (m[k]) want.push_back(sig.ap_name(k));
        if (j["ap"].contains(role_word(r))) got = j["ap"][role_word(r)].get<std::vector<std::string>>();
        if (got != want)
          throw DataError(std::string("ap.") + role_word(r) + " does not match the signal encoding");
      }
    }
    TransitionSystem ts(sig);
    const json & states = j.at("states");
    for (auto & st : states) {
      Valuation v;
      if (st.contains("values")) {
        const json & vals = st["values"];
        for (auto & s : sig.signals()) {
          if (!vals.contains(s.name)) throw DataError("state lacks a value for '" + s.name + "'");
          v.push_back(vals[s.name].get<Value>());
        }
      } else if (st.contains("label")) {
        Label l(sig.ap_count(), false);
        for (auto & n : st["label"]) {
          int k = sig.find_ap(n.get<std::string>());
          if (k < 0) throw DataError("unknown proposition '" + n.get<std::string>() + "'");
          l[k] = true;
        }
        v = sig.decode(l);
      } else {
        throw DataError("state needs 'values' or 'label'");
      }
      ts.add_state(std::move(v));
    }
    for (size_t s = 0; s < states.size(); ++s)
      for (auto & t : states[s].at("succ")) ts.add_edge(uint32_t(s), t.get<uint32_t>());
    for (auto & s : j.at("initial")) ts.add_initial(s.get<uint32_t>());
    ts.finalize();
    return ts;
  } catch (const json::exception & e) {
    throw DataError(std::string("model: ") + e.what());
  }
}

TransitionSystem load_model(const std::string & path)
{
  std::ifstream in(path);
  if (!in) throw DataError("cannot open model file '" + path + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error & e) {
    throw DataError(path + ": " + e.what());
  }
  return model_from_json(j);
}

}  // namespace dope::react
