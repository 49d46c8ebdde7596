#include <algorithm>
#include <chrono>
#include <map>
#include <unordered_map>

#include "dope/errors.h"
#include "dope/parallel.h"
#include "internal.h"

namespace dope::hyper {

using namespace detail;

namespace {

struct VecHash
{
  size_t operator()(const std::vector<uint64_t> & v) const
  {
    uint64_t h = 1469598103934665603ull ^ v.size();
    for (uint64_t x : v) h = (h ^ x) * 1099511628211ull, h ^= h >> 29;
    return size_t(h);
  }
};

// One forall-forall-exists characterization by subset construction: a
// configuration is a pair of copy nodes for the universal traces and the
// set of (state, condition state) pairs the exists trace can be in.
FormulaResult check_one(const TransitionSystem & ts, const Vocabulary & voc, const Characterization & c,
                        size_t budget)
{
  FormulaResult res;
  std::vector<std::vector<LtlP>> per;
  std::vector<LtlP> rest;
  split_by_var(c.formula.premise, 2, per, rest);
  if (!rest.empty()) throw UnsupportedError("premise relates several traces");
  CopyGraph g1 = build_copy(ts, react::ltl_and(per[0]), 0, 3);
  CopyGraph g2 = build_copy(ts, react::ltl_and(per[1]), 1, 3);
  if (g1.init.empty() || g2.init.empty()) {
    res.truth = Truth::Holds;
    res.reason = "no pair of traces meets the premise";
    return res;
  }
  (void)voc;
  SafetyAutomaton cond(c.condition);
  auto state_of = [&](int var, uint32_t u, uint32_t v) { return var == 0 ? g1.state[u] : g2.state[v]; };

  struct Config
  {
    uint32_t u, v, set;
    uint32_t parent;
  };
  std::vector<std::vector<uint64_t>> sets;
  std::unordered_map<std::vector<uint64_t>, uint32_t, VecHash> set_id;
  auto intern = [&](std::vector<uint64_t> && s) {
    auto [it, fresh] = set_id.emplace(s, uint32_t(sets.size()));
    if (fresh) sets.push_back(std::move(s));
    return it->second;
  };
  std::vector<Config> configs;
  std::unordered_map<uint64_t, uint32_t> seen;  // (u, v) -> index into a per-pair set table
  std::vector<std::unordered_map<uint32_t, uint32_t>> by_pair;
  auto add = [&](uint32_t u, uint32_t v, uint32_t set, uint32_t parent) {
    uint64_t pk = uint64_t(u) << 32 | v;
    auto [it, fresh] = seen.emplace(pk, uint32_t(by_pair.size()));
    if (fresh) by_pair.emplace_back();
    auto & m = by_pair[it->second];
    if (m.count(set)) return;
    m.emplace(set, uint32_t(configs.size()));
    configs.push_back({u, v, set, parent});
  };
  // the budget counts generated successors, duplicates included, and is
  // checked before a layer is expanded
  size_t generated = 0;

  // successor set of the exists trace; letters follow the copied traces
  auto post = [&](const std::vector<uint64_t> & from, bool initial, uint32_t u, uint32_t v) {
    uint32_t su = g1.state[u], sv = g2.state[v];
    const Valuation * L[3] = {&ts.values(su), &ts.values(sv), nullptr};
    uint32_t p_need = ts.letter(state_of(c.param_from, u, v), Role::Param);
    uint32_t i_need = ts.letter(state_of(c.input_from, u, v), Role::Input);
    std::vector<uint64_t> out;
    auto try_state = [&](uint32_t t, uint32_t q) {
      if (ts.letter(t, Role::Param) != p_need || ts.letter(t, Role::Input) != i_need) return;
      L[2] = &ts.values(t);
      uint32_t r = cond.step(q, {L[0], L[1], L[2]});
      if (r != SafetyAutomaton::kFalse) out.push_back(uint64_t(t) << 32 | r);
    };
    if (initial)
      for (uint32_t t : ts.initial()) try_state(t, cond.initial());
    else
      for (uint64_t e : from)
        for (uint32_t t : ts.succ(uint32_t(e >> 32))) try_state(t, uint32_t(e));
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  };

  std::optional<std::pair<uint32_t, std::pair<uint32_t, uint32_t>>> bad;  // parent, (u, v)
  bool over = false;
  for (uint32_t u : g1.init) {
    for (uint32_t v : g2.init) {
      auto s = post({}, true, u, v);
      if (s.empty()) {
        bad = {uint32_t(-1), {u, v}};
        break;
      }
      add(u, v, intern(std::move(s)), uint32_t(-1));
      ++generated;
    }
    if (bad) break;
  }

  size_t head = 0;
  while (!bad && !over && head < configs.size()) {
    size_t end = configs.size();
    size_t n = end - head;
    size_t layer = 0;
    for (size_t x = head; x < end; ++x) layer += g1.succ[configs[x].u].size() * g2.succ[configs[x].v].size();
    if (generated + layer > budget) {
      over = true;
      break;
    }
    generated += layer;
    struct Out
    {
      uint32_t from, u, v;
      std::vector<uint64_t> set;
    };
    size_t chunks = std::min<size_t>(n, std::max(1u, jobs()) * 4);
    std::vector<std::vector<Out>> outs(chunks);
    parallel_for(chunks, [&](size_t k) {
      size_t lo = head + n * k / chunks, hi = head + n * (k + 1) / chunks;
      for (size_t x = lo; x < hi; ++x) {
        const Config cf = configs[x];
        const auto & from = sets[cf.set];
        for (uint32_t u2 : g1.succ[cf.u])
          for (uint32_t v2 : g2.succ[cf.v]) {
            auto s = post(from, false, u2, v2);
            outs[k].push_back({uint32_t(x), u2, v2, std::move(s)});
            if (outs[k].back().set.empty()) return;
          }
      }
    });
    for (auto & chunk : outs) {
      for (auto & o : chunk) {
        if (o.set.empty()) {
          bad = {o.from, {o.u, o.v}};
          break;
        }
        add(o.u, o.v, intern(std::move(o.set)), o.from);
      }
      if (bad) break;
    }
    head = end;
  }
  res.explored = generated;
  if (bad) {
    std::vector<uint32_t> p1{bad->second.first}, p2{bad->second.second};
    for (uint32_t x = bad->first; x != uint32_t(-1); x = configs[x].parent) {
      p1.push_back(configs[x].u);
      p2.push_back(configs[x].v);
    }
    std::reverse(p1.begin(), p1.end());
    std::reverse(p2.begin(), p2.end());
    Witness w;
    w.vars = {c.formula.prefix[0].second, c.formula.prefix[1].second};
    w.traces = {react::to_lasso(ts, extend(g1, p1)), react::to_lasso(ts, extend(g2, p2))};
    w.bad_at = p1.size() - 1;
    w.instance = c.name;
    w.note = "no " + c.formula.prefix[2].second + " exists for this prefix";
    res.truth = Truth::Fails;
    res.witness = std::move(w);
    return res;
  }
  if (over) {
    res.reason = "budget of " + std::to_string(budget) + " generated configurations exceeded";
    return res;
  }
  res.truth = Truth::Holds;
  return res;
}

}  // namespace

Verdict check_exact(const TransitionSystem & ts, const Vocabulary & v, Property p, size_t budget)
{
  if (!v.past_forgetful()) throw UnsupportedError("dnew distances are only supported by the oracle mode");
  Verdict out;
  out.property = p;
  out.mode = Mode::Exact;
  bool unknown = false;
  for (const Characterization & c : characterizations(v, p)) {
    auto t0 = std::chrono::steady_clock::now();
    FormulaResult r = check_one(ts, v, c, budget);
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    out.instances.push_back({c.name, c.formula.str(), r.truth, r.explored, secs});
    out.explored += r.explored;
    if (r.truth == Truth::Fails) {
      out.status = Status::Doped;
      out.witness = r.witness;
      out.reason = c.name + " fails";
      return out;
    }
    if (r.truth == Truth::Unknown) {
      unknown = true;
      out.reason = c.name + ": " + r.reason;
    }
  }
  out.status = unknown ? Status::Unknown : Status::Clean;
  return out;
}

}  // namespace dope::hyper
