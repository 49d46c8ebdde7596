#include <algorithm>
#include <map>
#include <numeric>
#include <unordered_map>

#include "dope/errors.h"
#include "dope/parallel.h"
#include "internal.h"

namespace dope::hyper {

using namespace detail;

namespace detail {

size_t Bits::count() const
{
  size_t n = 0;
  for (uint64_t x : w) n += size_t(__builtin_popcountll(x));
  return n;
}

size_t Bits::first() const
{
  for (size_t k = 0; k < w.size(); ++k)
    if (w[k]) return k * 64 + size_t(__builtin_ctzll(w[k]));
  return size_t(-1);
}

size_t lcm_capped(size_t a, size_t b)
{
  size_t l = a / std::gcd(a, b) * b;
  if (l > 1000000) throw UnsupportedError("lasso periods too large to align");
  return l;
}

std::vector<Valuation> decode_prefix(const Signature & sig, const Lasso & t, size_t n)
{
  std::vector<Valuation> out;
  for (size_t k = 0; k < n; ++k) out.push_back(sig.decode(t.at(k)));
  return out;
}

unsigned vars_of(const Ltl & f)
{
  if (f.op == Ltl::Op::Atom) return 1u << f.atom->a | 1u << f.atom->b;
  unsigned m = 0;
  for (auto & a : f.args) m |= vars_of(*a);
  return m;
}

void split_by_var(const LtlP & f, int arity, std::vector<std::vector<LtlP>> & per_var,
                  std::vector<LtlP> & rest)
{
  per_var.resize(arity);
  std::function<void(const LtlP &, bool)> go = [&](const LtlP & g, bool under_g) {
    if (g->op == Ltl::Op::And) {
      for (auto & a : g->args) go(a, under_g);
      return;
    }
    if (g->op == Ltl::Op::Globally && g->args[0]->op == Ltl::Op::And) {
      go(g->args[0], true);
      return;
    }
    if (g->op == Ltl::Op::True) return;
    LtlP h = under_g ? react::ltl_globally(g) : g;
    unsigned m = vars_of(*g);
    if (m == 0 && arity > 0) {
      per_var[0].push_back(h);
      return;
    }
    if ((m & (m - 1)) == 0) {
      int v = __builtin_ctz(m);
      if (v < arity) {
        per_var[v].push_back(h);
        return;
      }
    }
    rest.push_back(h);
  };
  go(f, false);
}

CopyGraph build_copy(const TransitionSystem & ts, const LtlP & constraint, int var, int arity)
{
  (void)var;
  SafetyAutomaton a(constraint);
  auto letters = [&](uint32_t s) {
    return std::vector<const Valuation *>(arity, &ts.values(s));
  };
  std::unordered_map<uint64_t, uint32_t> id;
  std::vector<std::pair<uint32_t, uint32_t>> nodes;
  std::vector<std::vector<uint32_t>> succ;
  std::vector<uint32_t> init, work;
  auto get = [&](uint32_t s, uint32_t q) {
    auto [it, fresh] = id.emplace(uint64_t(s) << 32 | q, uint32_t(nodes.size()));
    if (fresh) {
      nodes.push_back({s, q});
      succ.emplace_back();
      work.push_back(it->second);
    }
    return it->second;
  };
  for (uint32_t s : ts.initial()) {
    uint32_t q = a.step(a.initial(), letters(s));
    if (q != SafetyAutomaton::kFalse) init.push_back(get(s, q));
  }
  while (!work.empty()) {
    uint32_t n = work.back();
    work.pop_back();
    auto [s, q] = nodes[n];
    for (uint32_t t : ts.succ(s)) {
      uint32_t r = a.step(q, letters(t));
      if (r == SafetyAutomaton::kFalse) continue;
      uint32_t m = get(t, r);
      succ[n].push_back(m);
    }
  }
  // greatest fixed point: keep nodes with a live successor
  std::vector<bool> live(nodes.size(), true);
  for (bool changed = true; changed;) {
    changed = false;
    for (size_t n = 0; n < nodes.size(); ++n) {
      if (!live[n]) continue;
      bool any = false;
      for (uint32_t m : succ[n]) any = any || live[m];
      if (!any) live[n] = false, changed = true;
    }
  }
  // compact in a deterministic order: sorted by (state, constraint state)
  std::vector<uint32_t> order;
  for (uint32_t n = 0; n < nodes.size(); ++n)
    if (live[n]) order.push_back(n);
  std::sort(order.begin(), order.end(), [&](uint32_t x, uint32_t y) { return nodes[x] < nodes[y]; });
  std::vector<uint32_t> remap(nodes.size(), uint32_t(-1));
  for (uint32_t k = 0; k < order.size(); ++k) remap[order[k]] = k;
  CopyGraph g;
  for (uint32_t n : order) {
    g.state.push_back(nodes[n].first);
    g.cstate.push_back(nodes[n].second);
    std::vector<uint32_t> out;
    for (uint32_t m : succ[n])
      if (live[m]) out.push_back(remap[m]);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    g.succ.push_back(std::move(out));
  }
  for (uint32_t n : init)
    if (live[n]) g.init.push_back(remap[n]);
  std::sort(g.init.begin(), g.init.end());
  g.init.erase(std::unique(g.init.begin(), g.init.end()), g.init.end());
  return g;
}

Run extend(const CopyGraph & g, const std::vector<uint32_t> & path)
{
  std::vector<uint32_t> cont{path.back()};
  std::map<uint32_t, size_t> seen{{path.back(), 0}};
  for (;;) {
    uint32_t n = g.succ[cont.back()].front();
    auto it = seen.find(n);
    if (it != seen.end()) {
      Run r;
      for (size_t k = 0; k + 1 < path.size(); ++k) r.stem.push_back(g.state[path[k]]);
      for (size_t k = 0; k < it->second; ++k) r.stem.push_back(g.state[cont[k]]);
      for (size_t k = it->second; k < cont.size(); ++k) r.loop.push_back(g.state[cont[k]]);
      return r;
    }
    seen[n] = cont.size();
    cont.push_back(n);
  }
}

}  // namespace detail

namespace {

// premise conjuncts per variable; anything relating two traces is refused
std::vector<LtlP> premise_per_var(const LtlP & premise, int arity)
{
  std::vector<std::vector<LtlP>> per;
  std::vector<LtlP> rest;
  split_by_var(premise ? premise : react::ltl_const(true), arity, per, rest);
  if (!rest.empty())
    throw UnsupportedError("premise relates several traces: " + react::to_string(*rest[0], {"a", "b", "c"}));
  std::vector<LtlP> out;
  for (auto & v : per) out.push_back(react::ltl_and(v));
  return out;
}

}  // namespace

FormulaResult check_forall_forall(const TransitionSystem & ts, const HyperFormula & f)
{
  if (f.prefix.size() != 2 || f.prefix[0].first != Quant::Forall || f.prefix[1].first != Quant::Forall)
    throw UnsupportedError("expected a forall-forall formula");
  auto prem = premise_per_var(f.premise, 2);
  CopyGraph g1 = build_copy(ts, prem[0], 0, 2), g2 = build_copy(ts, prem[1], 1, 2);
  SafetyAutomaton body(f.body);
  FormulaResult res;
  const size_t n2 = g2.size();
  if (g1.init.empty() || g2.init.empty()) {
    res.truth = Truth::Holds;
    res.reason = "no pair of traces meets the premise";
    return res;
  }

  // successor sets of copy-2 nodes, and the initial set
  std::vector<Bits> succ2(n2, Bits(n2));
  std::vector<std::vector<uint32_t>> pred2(n2);
  for (uint32_t y = 0; y < n2; ++y)
    for (uint32_t z : g2.succ[y]) succ2[y].set(z), pred2[z].push_back(y);
  Bits init2(n2);
  for (uint32_t y : g2.init) init2.set(y);

  // body masks split by copy-1 model state: part[s1] lists (mask, copy-2 nodes)
  std::vector<uint32_t> s1s(g1.state.begin(), g1.state.end());
  std::sort(s1s.begin(), s1s.end());
  s1s.erase(std::unique(s1s.begin(), s1s.end()), s1s.end());
  std::unordered_map<uint32_t, size_t> s1_index;
  for (size_t k = 0; k < s1s.size(); ++k) s1_index[s1s[k]] = k;
  std::vector<uint32_t> s2s(g2.state.begin(), g2.state.end());
  std::sort(s2s.begin(), s2s.end());
  s2s.erase(std::unique(s2s.begin(), s2s.end()), s2s.end());
  std::unordered_map<uint32_t, size_t> s2_index;
  for (size_t k = 0; k < s2s.size(); ++k) s2_index[s2s[k]] = k;
  std::vector<std::vector<std::pair<uint64_t, Bits>>> part(s1s.size());
  parallel_for(s1s.size(), [&](size_t k) {
    const Valuation & v1 = ts.values(s1s[k]);
    std::vector<uint64_t> m(s2s.size());
    for (size_t j = 0; j < s2s.size(); ++j) m[j] = body.mask({&v1, &ts.values(s2s[j])});
    std::map<uint64_t, Bits> by;
    for (uint32_t y = 0; y < n2; ++y) {
      uint64_t mv = m[s2_index[g2.state[y]]];
      auto it = by.try_emplace(mv, n2).first;
      it->second.set(y);
    }
    for (auto & [mv, b] : by) part[k].emplace_back(mv, std::move(b));
  });
  auto part_of = [&](uint32_t g1node) -> const auto & { return part[s1_index[g1.state[g1node]]]; };

  struct Entry
  {
    uint64_t key;  // g1 << 32 | body state
    Bits bits;
  };
  struct Bad
  {
    size_t entry = size_t(-1);  // in the previous layer; npos for layer 0
    uint32_t g1 = 0, g2 = 0;
    uint64_t mask = 0;
  };
  std::unordered_map<uint64_t, Bits> visited;
  std::vector<std::vector<Entry>> layers;
  std::optional<Bad> bad;

  auto finish_layer = [&](std::map<uint64_t, Bits> & next) {
    std::vector<Entry> layer;
    for (auto & [key, b] : next) {
      Bits & vis = visited.try_emplace(key, n2).first->second;
      Bits fresh(n2);
      bool any = false;
      for (size_t k = 0; k < b.w.size(); ++k) {
        fresh.w[k] = b.w[k] & ~vis.w[k];
        vis.w[k] |= fresh.w[k];
        any = any || fresh.w[k];
      }
      if (any) layer.push_back({key, std::move(fresh)});
    }
    return layer;
  };

  {
    std::map<uint64_t, Bits> first;
    for (uint32_t x : g1.init)
      for (auto & [mv, bits] : part_of(x)) {
        Bits b(n2);
        for (size_t k = 0; k < b.w.size(); ++k) b.w[k] = bits.w[k] & init2.w[k];
        if (!b.any()) continue;
        uint32_t q = body.step(body.initial(), mv);
        if (q == SafetyAutomaton::kFalse) {
          if (!bad) bad = Bad{size_t(-1), x, uint32_t(b.first()), mv};
          continue;
        }
        if (q == SafetyAutomaton::kTrue) continue;
        auto it = first.try_emplace(uint64_t(x) << 32 | q, n2).first;
        it->second.or_with(b);
      }
    layers.push_back(finish_layer(first));
  }

  while (!bad && !layers.back().empty()) {
    const auto & cur = layers.back();
    size_t chunks = std::min<size_t>(cur.size(), std::max(1u, jobs()) * 4);
    std::vector<std::map<uint64_t, Bits>> out(chunks);
    std::vector<std::optional<Bad>> bads(chunks);
    parallel_for(chunks, [&](size_t c) {
      size_t lo = cur.size() * c / chunks, hi = cur.size() * (c + 1) / chunks;
      std::unordered_map<uint64_t, uint32_t> cache;
      for (size_t e = lo; e < hi; ++e) {
        uint32_t x = uint32_t(cur[e].key >> 32), q = uint32_t(cur[e].key);
        Bits post(n2);
        cur[e].bits.each([&](size_t y) { post.or_with(succ2[y]); });
        for (uint32_t x2 : g1.succ[x])
          for (auto & [mv, bits] : part_of(x2)) {
            Bits b(n2);
            bool any = false;
            for (size_t k = 0; k < b.w.size(); ++k) {
              b.w[k] = bits.w[k] & post.w[k];
              any = any || b.w[k];
            }
            if (!any) continue;
            uint64_t ck = uint64_t(q) << 32 | mv;
            auto it = cache.find(ck);
            uint32_t r = it != cache.end() ? it->second : (cache[ck] = body.step(q, mv));
            if (r == SafetyAutomaton::kFalse) {
              if (!bads[c]) bads[c] = Bad{e, x2, uint32_t(b.first()), mv};
              continue;
            }
            if (r == SafetyAutomaton::kTrue) continue;
            out[c].try_emplace(uint64_t(x2) << 32 | r, n2).first->second.or_with(b);
          }
      }
    });
    for (auto & b : bads)
      if (b) {
        bad = b;
        break;
      }
    if (bad) break;
    std::map<uint64_t, Bits> merged;
    for (auto & m : out)
      for (auto & [key, b] : m) {
        auto it = merged.find(key);
        if (it == merged.end())
          merged.emplace(key, std::move(b));
        else
          it->second.or_with(b);
      }
    layers.push_back(finish_layer(merged));
  }

  for (auto & [key, b] : visited) res.explored += b.count();
  if (!bad) {
    res.truth = Truth::Holds;
    return res;
  }

  // walk back through the layers
  std::vector<uint32_t> p1{bad->g1}, p2{bad->g2};
  if (bad->entry != size_t(-1)) {
    size_t L = layers.size() - 1;
    const Entry & e = layers[L][bad->entry];
    uint32_t x = uint32_t(e.key >> 32), q = uint32_t(e.key);
    uint32_t y = uint32_t(-1);
    for (uint32_t p : pred2[bad->g2])
      if (e.bits.test(p)) {
        y = p;
        break;
      }
    p1.push_back(x);
    p2.push_back(y);
    for (size_t l = L; l-- > 0;) {
      bool found = false;
      for (const Entry & pe : layers[l]) {
        uint32_t px = uint32_t(pe.key >> 32), pq = uint32_t(pe.key);
        if (!std::binary_search(g1.succ[px].begin(), g1.succ[px].end(), x)) continue;
        if (body.step(pq, body.mask({&ts.values(g1.state[x]), &ts.values(g2.state[y])})) != q)
          continue;
        for (uint32_t py : pred2[y])
          if (pe.bits.test(py)) {
            x = px, q = pq, y = py;
            found = true;
            break;
          }
        if (found) break;
      }
      if (!found) throw DopeError("internal: counterexample reconstruction failed");
      p1.push_back(x);
      p2.push_back(y);
    }
  }
  std::reverse(p1.begin(), p1.end());
  std::reverse(p2.begin(), p2.end());
  Witness w;
  w.vars = f.names();
  w.traces = {react::to_lasso(ts, extend(g1, p1)), react::to_lasso(ts, extend(g2, p2))};
  w.bad_at = p1.size() - 1;
  res.truth = Truth::Fails;
  res.witness = std::move(w);
  return res;
}

FormulaResult check_exists(const TransitionSystem & ts, const HyperFormula & f, size_t budget)
{
  const int n = int(f.prefix.size());
  if (n < 1 || n > 3) throw UnsupportedError("exists formulas take one to three variables");
  for (auto & q : f.prefix)
    if (q.first != Quant::Exists) throw UnsupportedError("expected an exists-only formula");
  LtlP whole = f.premise && f.premise->op != Ltl::Op::True
                   ? react::ltl_implies(f.premise, f.body)
                   : f.body;
  std::vector<std::vector<LtlP>> per;
  std::vector<LtlP> rest;
  split_by_var(whole, n, per, rest);
  std::vector<CopyGraph> g;
  for (int v = 0; v < n; ++v) g.push_back(build_copy(ts, react::ltl_and(per[v]), v, n));
  SafetyAutomaton body(react::ltl_and(rest));
  FormulaResult res;
  for (auto & c : g)
    if (c.init.empty()) {
      res.truth = Truth::Fails;
      return res;
    }

  using Key = std::array<uint32_t, 4>;
  struct KeyHash
  {
    size_t operator()(const Key & k) const
    {
      uint64_t h = 1469598103934665603ull;
      for (uint32_t x : k) h = (h ^ x) * 1099511628211ull;
      return size_t(h);
    }
  };
  std::unordered_map<Key, uint32_t, KeyHash> id;
  std::vector<Key> nodes;
  std::vector<std::vector<uint32_t>> succ;
  std::vector<uint32_t> init;
  size_t head = 0;
  auto letters = [&](const Key & k) {
    std::vector<const Valuation *> ls;
    for (int v = 0; v < n; ++v) ls.push_back(&ts.values(g[v].state[k[v]]));
    return ls;
  };
  auto get = [&](Key k) -> int64_t {
    auto [it, fresh] = id.emplace(k, uint32_t(nodes.size()));
    if (fresh) {
      if (nodes.size() >= budget) return -1;
      nodes.push_back(k);
      succ.emplace_back();
    }
    return it->second;
  };
  // all combinations of per-copy choices
  auto combos = [&](const std::vector<const std::vector<uint32_t> *> & choices, auto && fn) {
    std::vector<size_t> idx(n, 0);
    for (;;) {
      Key k{0, 0, 0, 0};
      for (int v = 0; v < n; ++v) k[v] = (*choices[v])[idx[v]];
      fn(k);
      int v = n - 1;
      while (v >= 0 && ++idx[v] == choices[v]->size()) idx[v--] = 0;
      if (v < 0) break;
    }
  };
  bool over = false;
  {
    std::vector<const std::vector<uint32_t> *> ch;
    for (auto & c : g) ch.push_back(&c.init);
    combos(ch, [&](Key k) {
      if (over) return;
      uint32_t q = body.step(body.initial(), letters(k));
      if (q == SafetyAutomaton::kFalse) return;
      k[3] = q;
      int64_t x = get(k);
      if (x < 0) over = true;
      else init.push_back(uint32_t(x));
    });
  }
  while (!over && head < nodes.size()) {
    uint32_t x = uint32_t(head++);
    Key k = nodes[x];
    std::vector<const std::vector<uint32_t> *> ch;
    for (int v = 0; v < n; ++v) ch.push_back(&g[v].succ[k[v]]);
    combos(ch, [&](Key m) {
      if (over) return;
      uint32_t q = body.step(k[3], letters(m));
      if (q == SafetyAutomaton::kFalse) return;
      m[3] = q;
      int64_t y = get(m);
      if (y < 0) over = true;
      else succ[x].push_back(uint32_t(y));
    });
  }
  res.explored = nodes.size();
  if (over) {
    res.reason = "state budget of " + std::to_string(budget) + " product states exceeded";
    return res;
  }
  std::vector<bool> live(nodes.size(), true);
  for (bool changed = true; changed;) {
    changed = false;
    for (size_t x = nodes.size(); x-- > 0;) {
      if (!live[x]) continue;
      bool any = false;
      for (uint32_t y : succ[x]) any = any || live[y];
      if (!any) live[x] = false, changed = true;
    }
  }
  uint32_t start = uint32_t(-1);
  for (uint32_t x : init)
    if (live[x]) {
      start = x;
      break;
    }
  if (start == uint32_t(-1)) {
    res.truth = Truth::Fails;
    return res;
  }
  std::vector<uint32_t> path{start};
  std::map<uint32_t, size_t> seen{{start, 0}};
  size_t loop_at = 0;
  for (;;) {
    uint32_t nx = uint32_t(-1);
    for (uint32_t y : succ[path.back()])
      if (live[y]) {
        nx = y;
        break;
      }
    auto it = seen.find(nx);
    if (it != seen.end()) {
      loop_at = it->second;
      break;
    }
    seen[nx] = path.size();
    path.push_back(nx);
  }
  Witness w;
  w.vars = f.names();
  for (int v = 0; v < n; ++v) {
    Run r;
    for (size_t k = 0; k < path.size(); ++k)
      (k < loop_at ? r.stem : r.loop).push_back(g[v].state[nodes[path[k]][v]]);
    w.traces.push_back(react::to_lasso(ts, r));
  }
  res.truth = Truth::Holds;
  res.witness = std::move(w);
  return res;
}

bool exists_partner(const TransitionSystem & ts, const LtlP & condition,
                    const std::vector<const Lasso *> & fixed, int var, const Lasso & param_src,
                    const Lasso & input_src)
{
  const Signature & sig = ts.signature();
  size_t stem = input_src.stem.size(), period = input_src.loop.size();
  for (auto * t : fixed) {
    stem = std::max(stem, t->stem.size());
    period = lcm_capped(period, t->loop.size());
  }
  size_t span = stem + period;
  auto next = [&](size_t p) { return p + 1 < span ? p + 1 : stem; };
  std::vector<std::vector<Valuation>> fv;
  for (auto * t : fixed) fv.push_back(decode_prefix(sig, *t, span));
  uint32_t p_letter = sig.letter(sig.decode(param_src.at(0)), Role::Param);
  std::vector<uint32_t> in_letter;
  for (size_t k = 0; k < span; ++k) in_letter.push_back(sig.letter(sig.decode(input_src.at(k)), Role::Input));
  SafetyAutomaton a(condition);
  const int arity = int(fixed.size()) + 1;
  auto letters = [&](uint32_t s, size_t pos) {
    std::vector<const Valuation *> ls(arity);
    size_t j = 0;
    for (int v = 0; v < arity; ++v) ls[v] = v == var ? &ts.values(s) : &fv[j++][pos];
    return ls;
  };
  auto ok = [&](uint32_t s, size_t pos) {
    return ts.letter(s, Role::Param) == p_letter && ts.letter(s, Role::Input) == in_letter[pos];
  };
  struct N
  {
    uint32_t s, pos, q;
    bool operator<(const N & o) const { return std::tie(s, pos, q) < std::tie(o.s, o.pos, o.q); }
  };
  std::map<N, uint32_t> id;
  std::vector<N> nodes;
  std::vector<std::vector<uint32_t>> succ;
  std::vector<uint32_t> init;
  auto get = [&](N n) {
    auto [it, fresh] = id.emplace(n, uint32_t(nodes.size()));
    if (fresh) nodes.push_back(n), succ.emplace_back();
    return it->second;
  };
  for (uint32_t s : ts.initial())
    if (ok(s, 0)) {
      uint32_t q = a.step(a.initial(), letters(s, 0));
      if (q != SafetyAutomaton::kFalse) init.push_back(get({s, 0, q}));
    }
  for (size_t x = 0; x < nodes.size(); ++x) {
    N cur = nodes[x];
    uint32_t np = uint32_t(next(cur.pos));
    for (uint32_t t : ts.succ(cur.s))
      if (ok(t, np)) {
        uint32_t q = a.step(cur.q, letters(t, np));
        if (q != SafetyAutomaton::kFalse) {
          uint32_t y = get({t, np, q});
          succ[x].push_back(y);
        }
      }
  }
  std::vector<bool> live(nodes.size(), true);
  for (bool changed = true; changed;) {
    changed = false;
    for (size_t x = 0; x < nodes.size(); ++x) {
      if (!live[x]) continue;
      bool any = false;
      for (uint32_t y : succ[x]) any = any || live[y];
      if (!any) live[x] = false, changed = true;
    }
  }
  for (uint32_t x : init)
    if (live[x]) return true;
  return false;
}

}  // namespace dope::hyper
