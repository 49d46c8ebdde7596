#include <algorithm>
#include <map>
#include <unordered_map>

#include "dope/errors.h"
#include "dope/hausdorff.h"
#include "dope/parallel.h"
#include "internal.h"

namespace dope::hyper {

using namespace detail;

namespace detail {

// The sets of states one parameter reaches on an input prefix, interned.
class Reach
{
 public:
  explicit Reach(const TransitionSystem & ts) : ts_(ts) {}

  uint32_t intern(std::vector<uint32_t> && s)
  {
    auto [it, fresh] = id_.emplace(s, uint32_t(sets_.size()));
    if (fresh) {
      std::vector<uint32_t> outs;
      for (uint32_t x : s) outs.push_back(ts_.letter(x, Role::Output));
      std::sort(outs.begin(), outs.end());
      outs.erase(std::unique(outs.begin(), outs.end()), outs.end());
      sets_.push_back(std::move(s));
      outs_.push_back(std::move(outs));
    }
    return it->second;
  }
  const std::vector<uint32_t> & set(uint32_t k) const { return sets_[k]; }
  const std::vector<uint32_t> & outs(uint32_t k) const { return outs_[k]; }
  size_t size() const { return sets_.size(); }

  // states after reading `in` from set k; k = npos means the initial
  // states of parameter p
  std::vector<uint32_t> post(uint32_t k, uint32_t p, uint32_t in) const
  {
    std::vector<uint32_t> out;
    auto keep = [&](uint32_t t) {
      if (ts_.letter(t, Role::Input) == in && ts_.letter(t, Role::Param) == p) out.push_back(t);
    };
    if (k == uint32_t(-1))
      for (uint32_t t : ts_.initial()) keep(t);
    else
      for (uint32_t s : sets_[k])
        for (uint32_t t : ts_.succ(s)) keep(t);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  }

 private:
  struct H
  {
    size_t operator()(const std::vector<uint32_t> & v) const
    {
      uint64_t h = 1469598103934665603ull ^ v.size();
      for (uint32_t x : v) h = (h ^ x) * 1099511628211ull;
      return size_t(h);
    }
  };
  const TransitionSystem & ts_;
  std::vector<std::vector<uint32_t>> sets_, outs_;
  std::unordered_map<std::vector<uint32_t>, uint32_t, H> id_;
};

// a run through the given per-step state sets ending in `last`
std::vector<uint32_t> run_through(const TransitionSystem & ts, const std::vector<const std::vector<uint32_t> *> & steps,
                                  uint32_t last)
{
  std::vector<uint32_t> run{last};
  for (size_t j = steps.size() - 1; j-- > 0;) {
    const auto & prev = *steps[j];
    uint32_t pick = uint32_t(-1);
    for (uint32_t s : prev) {
      auto & sc = ts.succ(s);
      if (std::binary_search(sc.begin(), sc.end(), run.back())) {
        pick = s;
        break;
      }
    }
    if (pick == uint32_t(-1)) throw DopeError("internal: oracle run reconstruction failed");
    run.push_back(pick);
  }
  std::reverse(run.begin(), run.end());
  return run;
}

// run prefix continued along first successors until a state repeats
Run close_run(const TransitionSystem & ts, std::vector<uint32_t> path)
{
  std::map<uint32_t, size_t> seen;
  size_t start = path.size() - 1;
  seen[path.back()] = start;
  for (;;) {
    uint32_t n = ts.succ(path.back()).front();
    auto it = seen.find(n);
    if (it != seen.end()) {
      Run r;
      r.stem.assign(path.begin(), path.begin() + long(it->second));
      r.loop.assign(path.begin() + long(it->second), path.end());
      return r;
    }
    seen[n] = path.size();
    path.push_back(n);
  }
}

}  // namespace detail

namespace {

Valuation pick(const Valuation & v, const std::vector<size_t> & sel)
{
  Valuation out;
  for (size_t k : sel) out.push_back(v[k]);
  return out;
}

struct Config
{
  uint32_t p1, p2, m, flags, r1, r2;
  uint32_t parent;
  uint32_t l1, l2;  // letters read to get here: inputs, or (input, output) for clean
  bool operator==(const Config & o) const
  {
    return p1 == o.p1 && p2 == o.p2 && m == o.m && flags == o.flags && r1 == o.r1 && r2 == o.r2;
  }
};

struct ConfigHash
{
  size_t operator()(const Config & c) const
  {
    uint64_t h = 1469598103934665603ull;
    for (uint32_t x : {c.p1, c.p2, c.m, c.flags, c.r1, c.r2}) h = (h ^ x) * 1099511628211ull;
    return size_t(h);
  }
};

constexpr size_t kConfigCap = 4000000;

}  // namespace

Verdict bounded_oracle(const TransitionSystem & ts, const Contract & c, Property p, size_t depth)
{
  const Signature & sig = ts.signature();
  if (!ts.receptive())
    throw UnsupportedError("the oracle needs a receptive model: every state must accept every input");
  if (c.d_out.kind() == Distance::Kind::DNew) throw UnsupportedError("dnew is an input distance");
  Vocabulary voc(sig, c);
  react::Monitor mon(sig, c.stdin_spec);
  const bool dnew = c.d_in.kind() == Distance::Kind::DNew;
  const Distance & din_pt = dnew ? c.d_in.base() : c.d_in;
  const Value kin = dnew ? c.d_in.kappa() : c.kappa_in;
  BoundFn f = c.f.value_or(BoundFn::threshold(c.kappa_in, c.kappa_out));

  Verdict out;
  out.property = p;
  out.mode = Mode::Oracle;
  if (depth == 0) {
    size_t n = ts.size();
    double d = 2.0 * double(n) * double(n) * double(std::max<size_t>(1, mon.live_states()));
    depth = size_t(std::min(d, 1e4));
  }
  out.depth = depth;

  const auto & in_sel = sig.of_role(Role::Input);
  const auto & out_sel = sig.of_role(Role::Output);
  const size_t nin = sig.letter_count(Role::Input), nout = sig.letter_count(Role::Output);
  // point distances between letters
  std::vector<Value> din(nin * nin);
  for (uint32_t a = 0; a < nin; ++a)
    for (uint32_t b = 0; b < nin; ++b)
      din[a * nin + b] = din_pt(pick(sig.letter_values(Role::Input, a), in_sel),
                                pick(sig.letter_values(Role::Input, b), in_sel));
  std::vector<Valuation> outv(nout);
  for (uint32_t o = 0; o < nout; ++o) outv[o] = pick(sig.letter_values(Role::Output, o), out_sel);
  auto dout = [&](uint32_t x, uint32_t y) { return c.d_out(outv[x], outv[y]); };

  std::vector<uint32_t> params;
  for (uint32_t s : ts.initial()) params.push_back(ts.letter(s, Role::Param));
  std::sort(params.begin(), params.end());
  params.erase(std::unique(params.begin(), params.end()), params.end());
  std::erase_if(params, [&](uint32_t l) { return !voc.param_ok(l); });

  Reach reach(ts);
  std::unordered_map<uint64_t, uint32_t> post_memo;  // (set, input) -> set; the initial set uses p
  auto post = [&](uint32_t set, uint32_t par, uint32_t in) {
    uint64_t key = set == uint32_t(-1) ? (uint64_t(1) << 63 | uint64_t(par) << 32 | in)
                                       : (uint64_t(set) << 32 | in);
    auto it = post_memo.find(key);
    if (it != post_memo.end()) return it->second;
    auto v = reach.post(set, par, in);
    uint32_t id = v.empty() ? uint32_t(-2) : reach.intern(std::move(v));
    post_memo[key] = id;
    return id;
  };
  std::map<std::pair<uint32_t, uint32_t>, Value> hmemo;
  auto haus = [&](uint32_t r1, uint32_t r2) {
    auto it = hmemo.find({r1, r2});
    if (it != hmemo.end()) return it->second;
    Value h = hausdorff_with(dout, reach.outs(r1), reach.outs(r2));
    hmemo[{r1, r2}] = h;
    return h;
  };

  std::vector<Config> configs;
  std::unordered_map<Config, uint32_t, ConfigHash> seen;
  struct Bad
  {
    Config last;
  };
  std::optional<Bad> bad;
  bool capped = false;

  // flags: bit 0 inputs equal so far, bit 1 within kappa so far
  auto bound_of = [&](uint32_t flags, uint32_t a1, uint32_t a2) -> Value {
    if (p == Property::Robust) return c.kappa_out;
    if (!dnew) return f(din[a1 * nin + a2]);
    Value d = flags & 1 ? Value::integer(0) : flags & 2 ? Value::integer(1) : Value::integer(2);
    return f(d);
  };
  auto next_flags = [&](uint32_t flags, uint32_t a1, uint32_t a2) -> uint32_t {
    uint32_t eq = (flags & 1) && a1 == a2;
    uint32_t within = (flags & 2) && din[a1 * nin + a2] <= kin;
    return eq | within << 1;
  };

  // successors of one configuration (or of the start when from is null)
  auto expand = [&](const Config * from, uint32_t from_idx, std::vector<Config> & next) {
    uint32_t m0 = from ? from->m : mon.initial();
    if (p == Property::Clean) {
      for (size_t i1 = 0; i1 < params.size(); ++i1)
        for (size_t i2 = i1 + 1; i2 < params.size(); ++i2) {
          uint32_t p1 = params[i1], p2 = params[i2];
          if (from && (from->p1 != p1 || from->p2 != p2)) continue;
          for (uint32_t a = 0; a < nin; ++a) {
            uint32_t m = mon.step(m0, a);
            if (!mon.live(m)) continue;
            uint32_t s1 = post(from ? from->r1 : uint32_t(-1), p1, a);
            uint32_t s2 = post(from ? from->r2 : uint32_t(-1), p2, a);
            if (s1 == uint32_t(-2) || s2 == uint32_t(-2)) continue;
            // split both sets by output letter
            std::map<uint32_t, std::pair<std::vector<uint32_t>, std::vector<uint32_t>>> by;
            for (uint32_t t : reach.set(s1)) by[ts.letter(t, Role::Output)].first.push_back(t);
            for (uint32_t t : reach.set(s2)) by[ts.letter(t, Role::Output)].second.push_back(t);
            for (auto & [o, pr] : by) {
              Config n{p1, p2, m, 0, 0, 0, from_idx, a, o};
              if (pr.first.empty() || pr.second.empty()) {
                n.r1 = pr.first.empty() ? uint32_t(-2) : reach.intern(std::move(pr.first));
                n.r2 = pr.second.empty() ? uint32_t(-2) : reach.intern(std::move(pr.second));
                if (!bad) bad = Bad{n};
                return;
              }
              n.r1 = reach.intern(std::move(pr.first));
              n.r2 = reach.intern(std::move(pr.second));
              next.push_back(n);
            }
          }
        }
      return;
    }
    for (uint32_t p1 : params)
      for (uint32_t p2 : params) {
        if (from && (from->p1 != p1 || from->p2 != p2)) continue;
        for (uint32_t a1 = 0; a1 < nin; ++a1) {
          uint32_t m = mon.step(m0, a1);
          if (!mon.live(m)) continue;
          uint32_t s1 = post(from ? from->r1 : uint32_t(-1), p1, a1);
          for (uint32_t a2 = 0; a2 < nin; ++a2) {
            uint32_t fl = next_flags(from ? from->flags : 3u, a1, a2);
            if (p == Property::Robust && !(fl & 2)) continue;  // inputs diverged: nothing to show
            uint32_t s2 = post(from ? from->r2 : uint32_t(-1), p2, a2);
            Config n{p1, p2, m, fl, s1, s2, from_idx, a1, a2};
            bool e1 = s1 == uint32_t(-2), e2 = s2 == uint32_t(-2);
            Value h = e1 && e2 ? Value() : e1 || e2 ? Value::infinity() : haus(s1, s2);
            if (h > bound_of(fl, a1, a2)) {
              if (!bad) bad = Bad{n};
              return;
            }
            if (e1 || e2) continue;
            next.push_back(n);
          }
        }
      }
  };

  std::vector<uint32_t> layer;
  {
    std::vector<Config> next;
    expand(nullptr, uint32_t(-1), next);
    for (auto & n : next)
      if (seen.emplace(n, uint32_t(configs.size())).second) {
        layer.push_back(uint32_t(configs.size()));
        configs.push_back(n);
      }
  }
  size_t k = 1;
  for (; !bad && !layer.empty() && k < depth && !capped; ++k) {
    std::vector<uint32_t> fresh;
    for (uint32_t x : layer) {
      std::vector<Config> next;
      Config cur = configs[x];
      expand(&cur, x, next);
      if (bad) break;
      for (auto & n : next)
        if (seen.emplace(n, uint32_t(configs.size())).second) {
          fresh.push_back(uint32_t(configs.size()));
          configs.push_back(n);
          if (configs.size() >= kConfigCap) capped = true;
        }
    }
    layer = std::move(fresh);
  }
  out.explored = configs.size();
  out.instances.push_back({"prefix-oracle", std::string("bounded ") + property_name(p) + " check", Truth::Unknown,
                           configs.size(), 0});

  if (bad) {
    // the path of configurations, last one the violating step
    std::vector<Config> path{bad->last};
    for (uint32_t x = bad->last.parent; x != uint32_t(-1); x = configs[x].parent) path.push_back(configs[x]);
    std::reverse(path.begin(), path.end());
    size_t K = path.size() - 1;
    std::vector<std::vector<uint32_t>> set1, set2;
    // recompute the sets along the path (the last step may hold empty ones)
    uint32_t r1 = uint32_t(-1), r2 = uint32_t(-1);
    for (size_t j = 0; j <= K; ++j) {
      const Config & cf = path[j];
      if (p == Property::Clean) {
        auto filt = [&](std::vector<uint32_t> v, uint32_t o) {
          std::erase_if(v, [&](uint32_t t) { return ts.letter(t, Role::Output) != o; });
          return v;
        };
        set1.push_back(filt(reach.post(r1, cf.p1, cf.l1), cf.l2));
        set2.push_back(filt(reach.post(r2, cf.p2, cf.l1), cf.l2));
      } else {
        set1.push_back(reach.post(r1, cf.p1, cf.l1));
        set2.push_back(reach.post(r2, cf.p2, cf.l2));
      }
      if (j < K) r1 = cf.r1, r2 = cf.r2;
    }
    const Config & last = path.back();
    int far = 0;
    uint32_t far_state = 0;
    if (p == Property::Clean) {
      far = set1.back().empty() ? 1 : 0;
      far_state = (far == 0 ? set1 : set2).back().front();
    } else {
      Value bound = bound_of(last.flags, last.l1, last.l2);
      auto find_far = [&](const std::vector<uint32_t> & A, const std::vector<uint32_t> & B) -> int64_t {
        for (uint32_t s : A) {
          bool close = false;
          for (uint32_t t : B)
            if (dout(ts.letter(s, Role::Output), ts.letter(t, Role::Output)) <= bound) {
              close = true;
              break;
            }
          if (!close) return s;
        }
        return -1;
      };
      int64_t s = find_far(set1.back(), set2.back());
      if (s >= 0) far = 0, far_state = uint32_t(s);
      else far = 1, far_state = uint32_t(find_far(set2.back(), set1.back()));
    }
    // the far side's run, and some run of the other side on its inputs
    auto steps_of = [](const std::vector<std::vector<uint32_t>> & s) {
      std::vector<const std::vector<uint32_t> *> v;
      for (auto & x : s) v.push_back(&x);
      return v;
    };
    std::vector<uint32_t> run_far = run_through(ts, steps_of(far == 0 ? set1 : set2), far_state);
    std::vector<uint32_t> run_other;
    {
      // without the output filter, so the other side always has a run
      std::vector<std::vector<uint32_t>> raw;
      uint32_t par = far == 0 ? last.p2 : last.p1;
      for (size_t j = 0; j <= K; ++j) {
        uint32_t in = p == Property::Clean ? path[j].l1 : (far == 0 ? path[j].l2 : path[j].l1);
        std::vector<uint32_t> nx;
        if (j == 0) nx = reach.post(uint32_t(-1), par, in);
        else
          for (uint32_t s : raw.back())
            for (uint32_t t : ts.succ(s))
              if (ts.letter(t, Role::Input) == in) nx.push_back(t);
        std::sort(nx.begin(), nx.end());
        nx.erase(std::unique(nx.begin(), nx.end()), nx.end());
        raw.push_back(std::move(nx));
      }
      if (!raw.back().empty()) run_other = run_through(ts, steps_of(raw), raw.back().front());
    }
    Witness w;
    w.vars = {"pi1", "pi2"};
    w.instance = "prefix-oracle";
    Lasso lf = react::to_lasso(ts, close_run(ts, run_far));
    std::optional<Lasso> lo;
    if (!run_other.empty()) lo = react::to_lasso(ts, close_run(ts, run_other));
    if (far == 0) {
      w.traces.push_back(lf);
      if (lo) w.traces.push_back(*lo);
    } else {
      if (lo) w.traces.push_back(*lo);
      w.traces.push_back(lf);
    }
    w.bad_at = K;
    w.far = far;
    w.note = std::string(w.vars[far]) + "'s output at step " + std::to_string(K)
             + (p == Property::Clean ? " has no matching output prefix on the other side"
                                     : " is farther than the bound from every output of the other side");
    out.status = Status::Doped;
    out.instances.back().truth = Truth::Fails;
    out.witness = std::move(w);
    out.reason = "violation at prefix length " + std::to_string(K + 1);
    return out;
  }
  out.complete = layer.empty() && !capped;
  if (out.complete) {
    out.status = Status::Clean;
    out.instances.back().truth = Truth::Holds;
    out.reason = "all " + std::to_string(configs.size()) + " configurations explored";
  } else {
    out.status = Status::Unknown;
    out.reason = capped ? "configuration cap reached" : "no violation up to depth " + std::to_string(depth);
  }
  return out;
}

}  // namespace dope::hyper
