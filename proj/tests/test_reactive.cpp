#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <map>
#include <random>
#include <set>

#include "dope/errors.h"
#include "dope/lang/parser.h"
#include "dope/reactive.h"

using namespace dope;
using namespace dope::react;

namespace {

Value V(const char * s) { return Value::parse(s); }

// p in {0, 1}, i in {0, 1, 2}, o in {0, 1}
Signature small_sig()
{
  Signature s;
  s.add("p", Role::Param, lang::parse_domain("{0, 1}"));
  s.add("i", Role::Input, lang::parse_domain("{0, 1, 2}"));
  s.add("o", Role::Output, lang::parse_domain("{0, 1}"));
  return s;
}

// Every valuation is a state. Receptive unless `holes`; deterministic with
// fanout 1.
TransitionSystem random_ts(std::mt19937 & rng, int fanout, bool holes = false)
{
  Signature sig = small_sig();
  TransitionSystem ts(sig);
  auto id = [](int p, int i, int o) { return uint32_t(p * 6 + i * 2 + o); };
  for (int p = 0; p < 2; ++p)
    for (int i = 0; i < 3; ++i)
      for (int o = 0; o < 2; ++o) ts.add_state({Value::integer(p), Value::integer(i), Value::integer(o)});
  auto coin = [&](int n) { return int(rng() % n); };
  for (int p = 0; p < 2; ++p)
    for (int i = 0; i < 3; ++i)
      if (!holes || coin(4)) ts.add_initial(id(p, i, coin(2)));
  if (ts.initial().empty()) ts.add_initial(0);
  for (uint32_t s = 0; s < 12; ++s) {
    int p = s / 6;
    bool any = false;
    for (int i = 0; i < 3; ++i) {
      if (holes && coin(3) == 0) continue;
      int o = coin(2);
      ts.add_edge(s, id(p, i, o));
      any = true;
      if (fanout > 1 && coin(2)) ts.add_edge(s, id(p, i, 1 - o));
    }
    if (!any) ts.add_edge(s, id(p, 0, 0));
  }
  ts.finalize();
  return ts;
}

// random walk until a state repeats
Run random_run(const TransitionSystem & ts, std::mt19937 & rng)
{
  std::vector<uint32_t> path{ts.initial()[rng() % ts.initial().size()]};
  std::map<uint32_t, size_t> at{{path[0], 0}};
  for (;;) {
    auto & nx = ts.succ(path.back());
    uint32_t t = nx[rng() % nx.size()];
    if (at.count(t)) {
      size_t j = at[t];
      return {{path.begin(), path.begin() + j}, {path.begin() + j, path.end()}};
    }
    at[t] = path.size();
    path.push_back(t);
  }
}

Lasso random_lasso(const Signature & sig, std::mt19937 & rng, int max_stem = 3, int max_loop = 3)
{
  Lasso t;
  int a = rng() % (max_stem + 1), b = 1 + rng() % max_loop;
  auto letter = [&] {
    Valuation v{Value::integer(rng() % 2), Value::integer(rng() % 3), Value::integer(rng() % 2)};
    return sig.encode(v);
  };
  for (int k = 0; k < a; ++k) t.stem.push_back(letter());
  for (int k = 0; k < b; ++k) t.loop.push_back(letter());
  return t;
}

// Membership by subset construction: the word has a run iff every prefix
// has one (finite branching). The reachable sets at the loop starts are
// eventually periodic, so iterate until one repeats.
bool oracle_contains(const TransitionSystem & ts, const Label & params, const Lasso & in,
                     const Lasso & out)
{
  const Signature & sig = ts.signature();
  Label pm = sig.ap_mask(Role::Param), im = sig.ap_mask(Role::Input), om = sig.ap_mask(Role::Output);
  size_t stem = std::max(in.stem.size(), out.stem.size());
  size_t period = in.loop.size() * out.loop.size();
  auto fits = [&](uint32_t s, size_t k) {
    Label l = ts.label(s);
    return project(l, pm) == project(params, pm) && project(l, im) == project(in.at(k), im)
           && project(l, om) == project(out.at(k), om);
  };
  std::set<uint32_t> cur;
  for (uint32_t s : ts.initial())
    if (fits(s, 0)) cur.insert(s);
  std::set<std::set<uint32_t>> seen;
  for (size_t k = 1;; ++k) {
    if (cur.empty()) return false;
    if (k > stem && (k - stem) % period == 0 && !seen.insert(cur).second) return true;
    std::set<uint32_t> nx;
    for (uint32_t s : cur)
      for (uint32_t t : ts.succ(s))
        if (fits(t, k)) nx.insert(t);
    cur = std::move(nx);
  }
}

// Direct reading of LTL over aligned lassos: every suffix is one of the
// first stem + period positions, so a window of that length decides G, F,
// U and W.
struct LtlOracle
{
  const Signature & sig;
  std::vector<const Lasso *> tr;
  size_t stem = 0, period = 1;

  LtlOracle(const Signature & s, std::vector<const Lasso *> t) : sig(s), tr(std::move(t))
  {
    for (auto * x : tr) {
      stem = std::max(stem, x->stem.size());
      period = std::lcm(period, x->loop.size());
    }
  }

  bool sat(const Ltl & f, size_t k) const
  {
    using Op = Ltl::Op;
    size_t w = stem + period;
    auto a = [&](size_t j, size_t x) { return sat(*f.args[j], x); };
    switch (f.op) {
      case Op::True: return true;
      case Op::False: return false;
      case Op::Atom: {
        std::vector<Valuation> vs;
        for (auto * x : tr) vs.push_back(sig.decode(x->at(k)));
        std::vector<const Valuation *> ps;
        for (auto & v : vs) ps.push_back(&v);
        return f.atom->eval(ps);
      }
      case Op::Not: return !a(0, k);
      case Op::And:
        for (size_t j = 0; j < f.args.size(); ++j)
          if (!a(j, k)) return false;
        return true;
      case Op::Or:
        for (size_t j = 0; j < f.args.size(); ++j)
          if (a(j, k)) return true;
        return false;
      case Op::Implies: return !a(0, k) || a(1, k);
      case Op::Next: return a(0, k + 1);
      case Op::Globally:
        for (size_t j = k; j <= k + w; ++j)
          if (!a(0, j)) return false;
        return true;
      case Op::Finally:
        for (size_t j = k; j <= k + w; ++j)
          if (a(0, j)) return true;
        return false;
      case Op::Until:
      case Op::WeakUntil:
        for (size_t j = k; j <= k + w; ++j) {
          if (a(1, j)) return true;
          if (!a(0, j)) return false;
        }
        return f.op == Op::WeakUntil;
    }
    return false;
  }
};

std::string random_formula(std::mt19937 & rng, int depth, bool safety)
{
  static const char * atoms[] = {"i == 0", "i <= 1", "i != 1", "i >= 1", "i == 2"};
  auto atom = [&] {
    std::string a = std::string("(") + atoms[rng() % 5] + ")";
    return rng() % 3 == 0 ? "!" + a : a;
  };
  if (depth == 0) return atom();
  auto sub = [&] { return "(" + random_formula(rng, depth - 1, safety) + ")"; };
  int n = safety ? 6 : 9;
  switch (rng() % n) {
    case 0: return atom();
    case 1: return sub() + " && " + sub();
    case 2: return sub() + " || " + sub();
    case 3: return "X " + sub();
    case 4: return "G " + sub();
    case 5: return sub() + " W " + sub();
    case 6: return "F " + sub();
    case 7: return sub() + " U " + sub();
    default: return "!" + sub();
  }
}

}  // namespace

TEST_CASE("signature encodes grid indexes in binary")
{
  Signature s = small_sig();
  CHECK(s.ap_count() == 4);
  CHECK(s.ap_name(1) == "i.0");
  CHECK(s.ap_name(2) == "i.1");
  Label l = s.encode({V("1"), V("2"), V("0")});
  CHECK(l == Label{true, false, true, false});
  CHECK(s.decode(l) == Valuation{V("1"), V("2"), V("0")});
  CHECK_THROWS_AS(s.decode(Label{false, true, true, false}), DataError);  // i code 3
  CHECK_THROWS_AS(s.encode({V("0.5"), V("0"), V("0")}), DataError);
  CHECK_THROWS_AS(s.add("p", Role::Input, lang::parse_domain("{0}")), DataError);
  CHECK_THROWS_AS(s.add("q", Role::Local, lang::parse_domain("{0}")), DataError);
  CHECK(s.letter_count(Role::Input) == 3);
  CHECK(s.ap_mask(Role::Output) == Label{false, false, false, true});
}

TEST_CASE("encode and decode are inverse; letters round trip")
{
  Signature s = small_sig();
  for (int p = 0; p < 2; ++p)
    for (int i = 0; i < 3; ++i)
      for (int o = 0; o < 2; ++o) {
        Valuation v{Value::integer(p), Value::integer(i), Value::integer(o)};
        CHECK(s.decode(s.encode(v)) == v);
        for (Role r : {Role::Param, Role::Input, Role::Output}) {
          uint32_t l = s.letter(v, r);
          CHECK(s.letter(s.letter_values(r, l), r) == l);
        }
      }
}

TEST_CASE("finalize rejects malformed systems")
{
  Signature sig = small_sig();
  {
    TransitionSystem ts(sig);
    ts.add_state({V("0"), V("0"), V("0")});
    ts.add_edge(0, 0);
    CHECK_THROWS_AS(ts.finalize(), DataError);  // no initial state
  }
  {
    TransitionSystem ts(sig);
    ts.add_state({V("0"), V("0"), V("0")});
    ts.add_initial(0);
    CHECK_THROWS_AS(ts.finalize(), DataError);  // dead end
  }
  {
    TransitionSystem ts(sig);
    ts.add_state({V("0"), V("0"), V("0")});
    ts.add_state({V("1"), V("0"), V("0")});
    ts.add_initial(0);
    ts.add_edge(0, 1);
    ts.add_edge(1, 1);
    CHECK_THROWS_AS(ts.finalize(), DataError);  // parameter changes
  }
  TransitionSystem ts(sig);
  CHECK_THROWS_AS(ts.add_state({V("0"), V("7"), V("0")}), DataError);
  CHECK_THROWS_AS(ts.add_edge(0, 1), DataError);
}

TEST_CASE("projection identities")
{
  std::mt19937 rng(3);
  Signature s = small_sig();
  Label all(s.ap_count(), true), none(s.ap_count(), false);
  for (int n = 0; n < 200; ++n) {
    Lasso t = random_lasso(s, rng);
    Label m1(s.ap_count()), m2(s.ap_count());
    for (size_t k = 0; k < m1.size(); ++k) m1[k] = rng() % 2, m2[k] = rng() % 2;
    CHECK(project(t, all) == t);
    CHECK(project(project(t, m1), m2) == project(t, intersect(m1, m2)));
    CHECK(project(project(t, m1), m1) == project(t, m1));
    Lasso z = project(t, none);
    for (size_t k = 0; k < t.span() + 3; ++k) CHECK(z.at(k) == none);
  }
}

TEST_CASE("normalize keeps the word")
{
  std::mt19937 rng(5);
  Signature s = small_sig();
  for (int n = 0; n < 300; ++n) {
    Lasso t = random_lasso(s, rng, 4, 4);
    // unroll and rotate into an equal word with another shape
    Lasso u = t;
    size_t extra = rng() % 4;
    for (size_t k = 0; k < extra; ++k) u.stem.push_back(t.at(t.stem.size() + k));
    u.loop.clear();
    size_t reps = 1 + rng() % 2;
    for (size_t k = 0; k < reps * t.loop.size(); ++k) u.loop.push_back(t.at(t.stem.size() + extra + k));
    Lasso a = normalize(t), b = normalize(u);
    CHECK(a == b);
    CHECK(same_word(t, u));
    for (size_t k = 0; k < 3 * t.span(); ++k) CHECK(a.at(k) == t.at(k));
    CHECK(a.span() <= t.span());
    Lasso sfx = t.suffix(extra + 1);
    for (size_t k = 0; k < 2 * t.span(); ++k) CHECK(sfx.at(k) == t.at(k + extra + 1));
    CHECK(t.prefix(2).size() == 3);
  }
}

TEST_CASE("runs round trip through the output function")
{
  std::mt19937 rng(11);
  for (int n = 0; n < 60; ++n) {
    TransitionSystem ts = random_ts(rng, 2);
    const Signature & sig = ts.signature();
    CHECK(ts.receptive());
    Label im = sig.ap_mask(Role::Input), om = sig.ap_mask(Role::Output);
    for (int m = 0; m < 10; ++m) {
      Run r = random_run(ts, rng);
      Lasso t = to_lasso(ts, r);
      CHECK(run_at(ts, r, 5) == sig.decode(t.at(5)));
      OutputTraces outs = as_function(ts, t.at(0), project(t, im));
      CHECK_FALSE(outs.empty());
      CHECK(outs.contains(project(t, om)));
      for (const Lasso & o : outs.enumerate(50)) {
        CHECK(outs.contains(o));
        CHECK(oracle_contains(ts, t.at(0), t, o));
      }
    }
  }
}

TEST_CASE("output membership agrees with a subset-construction oracle")
{
  std::mt19937 rng(17);
  for (int n = 0; n < 40; ++n) {
    TransitionSystem ts = random_ts(rng, 2, n % 2 == 1);
    const Signature & sig = ts.signature();
    Label im = sig.ap_mask(Role::Input), om = sig.ap_mask(Role::Output);
    for (int m = 0; m < 25; ++m) {
      Lasso in = random_lasso(sig, rng), out = random_lasso(sig, rng);
      Label params = random_lasso(sig, rng).at(0);
      OutputTraces outs = as_function(ts, params, project(in, im));
      bool want = oracle_contains(ts, params, in, out);
      CHECK(outs.contains(project(out, om)) == want);
      if (want) CHECK_FALSE(outs.empty());
    }
  }
}

TEST_CASE("deterministic systems have one output per input")
{
  std::mt19937 rng(23);
  for (int n = 0; n < 30; ++n) {
    TransitionSystem ts = random_ts(rng, 1);
    CHECK(ts.deterministic());
    const Signature & sig = ts.signature();
    for (int m = 0; m < 10; ++m) {
      Lasso in = random_lasso(sig, rng);
      auto outs = as_function(ts, in.at(0), in).enumerate();
      CHECK(outs.size() == 1);
    }
  }
}

TEST_CASE("unrealizable inputs give no outputs")
{
  Signature sig = small_sig();
  TransitionSystem ts(sig);
  ts.add_state({V("0"), V("0"), V("0")});
  ts.add_state({V("0"), V("1"), V("1")});
  ts.add_initial(0);
  ts.add_edge(0, 1);
  ts.add_edge(1, 0);
  ts.finalize();
  CHECK_FALSE(ts.receptive());
  Lasso in{{}, {ts.label(0), ts.label(1)}};
  CHECK(as_function(ts, ts.label(0), in).enumerate().size() == 1);
  Lasso bad{{}, {ts.label(0)}};
  CHECK(as_function(ts, ts.label(0), bad).empty());
  Label p1 = sig.encode({V("1"), V("0"), V("0")});
  CHECK(as_function(ts, p1, in).empty());
}

TEST_CASE("StdIn monitors")
{
  Signature sig;
  sig.add("thrtl", Role::Input, lang::parse_domain("[0, 2] step 0.5"));
  sig.add("NOx", Role::Output, lang::parse_domain("{0, 1}"));
  Monitor g(sig, "G (thrtl in (0, 1])");
  CHECK(g.live_states() == 1);
  CHECK(g.letters() == 5);
  uint32_t q = g.initial();
  CHECK(g.live(g.step(q, 1)));   // 0.5
  CHECK(g.live(g.step(q, 2)));   // 1
  CHECK_FALSE(g.live(g.step(q, 0)));
  CHECK_FALSE(g.live(g.step(q, 3)));
  CHECK(g.accepts({1}, {2, 1}));
  CHECK_FALSE(g.accepts({1}, {2, 4}));

  Monitor t(sig, "true");
  CHECK(t.states() == 1);
  for (uint32_t l = 0; l < 5; ++l) CHECK(t.step(t.initial(), l) == t.initial());

  // a liveness prefix that can never be completed is rejected early
  Monitor x(sig, "X (thrtl == 0) && G (thrtl > 0)");
  CHECK_FALSE(x.live(x.initial()));

  CHECK_THROWS_AS(Monitor(sig, "F (thrtl == 1)"), UnsupportedError);
  CHECK_THROWS_AS(Monitor(sig, "(thrtl == 1) U (thrtl == 2)"), UnsupportedError);
  CHECK_THROWS_AS(Monitor(sig, "G (NOx == 0)"), SemanticError);
  CHECK_THROWS_AS(Monitor(sig, "G (speed == 0)"), SemanticError);
}

TEST_CASE("lasso semantics agrees with a direct reading")
{
  std::mt19937 rng(29);
  Signature sig = small_sig();
  for (int n = 0; n < 400; ++n) {
    std::string text = random_formula(rng, 3, false);
    LtlP f = parse_role_formula(sig, Role::Input, text);
    Lasso t = random_lasso(sig, rng, 3, 3);
    LtlOracle o(sig, {&t});
    for (size_t k = 0; k < 4; ++k) CHECK_MESSAGE(holds(*f, sig, {&t}, k) == o.sat(*f, k), text);
  }
  for (int n = 0; n < 200; ++n) {
    LtlP a = parse_role_formula(sig, Role::Input, random_formula(rng, 1, false), 0);
    LtlP b = parse_role_formula(sig, Role::Input, random_formula(rng, 1, false), 1);
    Lasso t1 = random_lasso(sig, rng), t2 = random_lasso(sig, rng);
    LtlOracle o(sig, {&t1, &t2});
    auto w = ltl_weak_until(a, b);
    CHECK(eval_weak_until(a, b, sig, {&t1, &t2}) == o.sat(*w, 0));
  }
}

TEST_CASE("monitor acceptance matches the lasso semantics on safety formulas")
{
  std::mt19937 rng(31);
  Signature sig = small_sig();
  for (int n = 0; n < 150; ++n) {
    std::string text = random_formula(rng, 3, true);
    Monitor m(sig, text);
    for (int j = 0; j < 10; ++j) {
      Lasso t = random_lasso(sig, rng, 3, 3);
      std::vector<uint32_t> stem, loop;
      for (auto & l : t.stem) stem.push_back(sig.letter(sig.decode(l), Role::Input));
      for (auto & l : t.loop) loop.push_back(sig.letter(sig.decode(l), Role::Input));
      CHECK_MESSAGE(m.accepts(stem, loop) == holds(*m.formula(), sig, {&t}), text);
    }
  }
}

TEST_CASE("progression rewrites")
{
  Signature sig = small_sig();
  LtlP f = parse_role_formula(sig, Role::Input, "G (i <= 1)");
  Valuation ok{V("0"), V("1"), V("0")}, bad{V("0"), V("2"), V("0")};
  CHECK(to_string(*progress(safety_nnf(f), {&ok}), {"t"}) == to_string(*safety_nnf(f), {"t"}));
  CHECK(progress(safety_nnf(f), {&bad})->op == Ltl::Op::False);
  LtlP x = parse_role_formula(sig, Role::Input, "X (i == 2)");
  CHECK(progress(safety_nnf(x), {&ok})->op == Ltl::Op::Atom);
}

TEST_CASE("model JSON round trip")
{
  std::mt19937 rng(37);
  for (int n = 0; n < 10; ++n) {
    TransitionSystem ts = random_ts(rng, 2, n % 2 == 0);
    auto j = model_to_json(ts);
    TransitionSystem back = model_from_json(j);
    CHECK(back.signature() == ts.signature());
    CHECK(back.size() == ts.size());
    CHECK(back.initial() == ts.initial());
    for (uint32_t s = 0; s < ts.size(); ++s) {
      CHECK(back.values(s) == ts.values(s));
      CHECK(back.succ(s) == ts.succ(s));
    }
    // labels alone are enough
    for (auto & st : j["states"]) st.erase("values");
    TransitionSystem lab = model_from_json(j);
    for (uint32_t s = 0; s < ts.size(); ++s) CHECK(lab.values(s) == ts.values(s));
  }
  TransitionSystem ts = random_ts(rng, 1);
  auto j = model_to_json(ts);
  j["ap"]["input"] = {"i.1", "i.0"};
  CHECK_THROWS_AS(model_from_json(j), DataError);
  j = model_to_json(ts);
  j["states"][0]["succ"] = {99};
  CHECK_THROWS_AS(model_from_json(j), DataError);
  j = model_to_json(ts);
  j["signals"][0]["role"] = "state";
  CHECK_THROWS_AS(model_from_json(j), DataError);
  CHECK_THROWS_AS(model_from_json(nlohmann::json::array()), DataError);
}
