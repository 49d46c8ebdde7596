#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <random>

#include "dope/errors.h"
#include "dope/hypercheck.h"
#include "dope/parallel.h"
#include "react_corpus.h"

using namespace dope;
using namespace dope::hyper;
using react::Label;
using react::Lasso;
using react_corpus::I;
using react_corpus::V;

namespace {

Lasso constant(const Signature & sig, const Valuation & v) { return {{}, {sig.encode(v)}}; }

Lasso word(const Signature & sig, const std::vector<Valuation> & stem, const std::vector<Valuation> & loop)
{
  Lasso t;
  for (auto & v : stem) t.stem.push_back(sig.encode(v));
  for (auto & v : loop) t.loop.push_back(sig.encode(v));
  return t;
}

// random walk until a state repeats
Lasso random_trace(const TransitionSystem & ts, std::mt19937 & rng)
{
  std::vector<uint32_t> path{ts.initial()[rng() % ts.initial().size()]};
  std::map<uint32_t, size_t> at{{path[0], 0}};
  for (;;) {
    auto & nx = ts.succ(path.back());
    uint32_t t = nx[rng() % nx.size()];
    if (at.count(t)) {
      size_t j = at[t];
      return react::to_lasso(ts, {{path.begin(), path.begin() + long(j)}, {path.begin() + long(j), path.end()}});
    }
    at[t] = path.size();
    path.push_back(t);
  }
}

// p = 0 may answer input 1 with 0 or 1; everything else answers 0
TransitionSystem one_sided_model()
{
  Signature sig;
  sig.add("p", Role::Param, lang::parse_domain("{0, 1}"));
  sig.add("i", Role::Input, lang::parse_domain("{0, 1}"));
  sig.add("o", Role::Output, lang::parse_domain("{0, 1}"));
  TransitionSystem ts(sig);
  std::vector<uint32_t> p0{ts.add_state({I(0), I(0), I(0)}), ts.add_state({I(0), I(1), I(0)}),
                           ts.add_state({I(0), I(1), I(1)})};
  std::vector<uint32_t> p1{ts.add_state({I(1), I(0), I(0)}), ts.add_state({I(1), I(1), I(0)})};
  for (auto * g : {&p0, &p1})
    for (uint32_t s : *g) {
      ts.add_initial(s);
      for (uint32_t t : *g) ts.add_edge(s, t);
    }
  ts.finalize();
  return ts;
}

Contract one_sided_contract()
{
  Contract c;
  c.stdin_spec = "G(i == 0)";
  c.kappa_in = V("2");
  c.kappa_out = V("0.5");
  return c;
}

}  // namespace

TEST_CASE("names round trip")
{
  for (Property p : {Property::Clean, Property::Robust, Property::FClean})
    CHECK(parse_property(property_name(p)) == p);
  for (Mode m : {Mode::Strengthen, Mode::Exact, Mode::Oracle}) CHECK(parse_mode(mode_name(m)) == m);
  CHECK_THROWS_AS(parse_property("robustly"), DataError);
  CHECK_THROWS_AS(parse_mode("fast"), DataError);
}

TEST_CASE("bit expansion agrees with the atoms on every grid pair")
{
  Signature sig = react_corpus::sig3();
  Contract c;
  c.pintrs.valuations = std::vector<std::map<std::string, Value>>{{{"p", I(1)}}};
  c.kappa_in = V("1");
  c.kappa_out = V("0.5");
  c.f = BoundFn::affine(V("0.5"), V("0.3"));
  Vocabulary v(sig, c);
  std::vector<LtlP> atoms = {v.same(Role::Output, 0, 1), v.same(Role::Param, 0, 1), v.in_within(0, 1),
                             v.out_within(0, 1), v.out_within_f(0, 1), v.pintrs(0), v.input_is(1, {I(2)})};
  std::vector<Valuation> all = product({&sig.signal(0).domain, &sig.signal(1).domain, &sig.signal(2).domain});
  for (const LtlP & a : atoms) {
    LtlP e = expand_bits(sig, a);
    CHECK(e.get() != a.get());
    for (auto & x : all)
      for (auto & y : all) {
        Lasso tx = constant(sig, x), ty = constant(sig, y);
        CHECK(react::holds(*a, sig, {&tx, &ty}) == react::holds(*e, sig, {&tx, &ty}));
      }
  }
}

TEST_CASE("formula shapes")
{
  Signature sig = react_corpus::sig3();
  Contract c;
  c.kappa_in = V("1");
  c.kappa_out = V("0.5");
  Vocabulary v(sig, c);
  CHECK(characterizations(v, Property::Clean).size() == 1);
  auto rc = characterizations(v, Property::Robust);
  REQUIRE(rc.size() == 2);
  CHECK(rc[0].formula.prefix[2].first == Quant::Exists);
  CHECK(rc[1].formula.prefix[2].second == "pi1'");
  CHECK(strengthened(v, Property::Robust).prefix.size() == 2);
  HyperFormula n = negation_instance(v, Property::Robust, Side::Left, {I(1)}, {I(2)});
  CHECK(n.prefix[2].first == Quant::Forall);
  CHECK(n.str().find("i[pi1] = 1") != std::string::npos);
  CHECK_THROWS_AS(negation_instance(v, Property::Clean, Side::Left, {I(1)}, {I(2)}), UnsupportedError);
  CHECK_THROWS_AS(guarantee(v, {V("0.5")}, {I(1)}), DataError);
  CHECK_THROWS_AS(guarantee(v, {I(1), I(1)}, {I(1)}), DataError);
}

TEST_CASE("robust condition releases when inputs diverge")
{
  Signature sig = react_corpus::sig3();
  Contract c;
  c.kappa_in = V("0");
  c.kappa_out = V("0");
  Vocabulary v(sig, c);
  LtlP cond = v.condition(Property::Robust, 0, 1);
  auto at = [](int i, int o) { return Valuation{I(0), I(i), I(o)}; };
  // inputs differ from step 3 on, outputs from step 5 on
  Lasso a = word(sig, {at(0, 0), at(0, 0), at(0, 0)}, {at(0, 0)});
  Lasso b = word(sig, {at(0, 0), at(0, 0), at(0, 0), at(1, 0), at(1, 0)}, {at(1, 2)});
  CHECK(react::holds(*cond, sig, {&a, &b}));
  CHECK(react::eval_weak_until(v.out_within(0, 1), react::ltl_not(v.in_within(0, 1)), sig, {&a, &b}));
  // outputs differ first: violated
  Lasso d = word(sig, {at(0, 0), at(0, 1)}, {at(1, 0)});
  CHECK_FALSE(react::holds(*cond, sig, {&a, &d}));
  // psi never holds: the condition is G(phi)
  CHECK(react::holds(*cond, sig, {&a, &a}));
  Lasso e = word(sig, {}, {at(0, 0), at(0, 1)});
  CHECK_FALSE(react::holds(*cond, sig, {&a, &e}));
}

TEST_CASE("forall-forall: trivial bodies")
{
  std::mt19937 rng(5);
  TransitionSystem ts = react_corpus::random_model(rng);
  HyperFormula f;
  f.prefix = {{Quant::Forall, "a"}, {Quant::Forall, "b"}};
  f.premise = react::ltl_const(true);
  f.body = react::ltl_const(true);
  CHECK(check_forall_forall(ts, f).truth == Truth::Holds);
  f.body = react::ltl_const(false);
  FormulaResult r = check_forall_forall(ts, f);
  CHECK(r.truth == Truth::Fails);
  REQUIRE(r.witness);
  CHECK(r.witness->bad_at == size_t(0));
  // unsatisfiable premise: vacuous
  f.premise = react::ltl_const(false);
  CHECK(check_forall_forall(ts, f).truth == Truth::Holds);
}

TEST_CASE("forall-forall agrees with sampled trace pairs")
{
  std::mt19937 rng(11);
  for (int round = 0; round < 40; ++round) {
    TransitionSystem ts = react_corpus::random_model(rng);
    Contract c = react_corpus::random_contract(rng);
    Vocabulary v(ts.signature(), c);
    for (Property p : {Property::Clean, Property::Robust, Property::FClean}) {
      HyperFormula f = strengthened(v, p);
      FormulaResult r = check_forall_forall(ts, f);
      REQUIRE(r.truth != Truth::Unknown);
      if (r.truth == Truth::Fails) {
        REQUIRE(r.witness);
        std::vector<const Lasso *> tr{&r.witness->traces[0], &r.witness->traces[1]};
        CHECK(react::holds(*f.premise, ts.signature(), tr));
        CHECK_FALSE(react::holds(*f.body, ts.signature(), tr));
        // every extension of the bad prefix fails: the prefix up to bad_at
        // already falsifies the body
        continue;
      }
      for (int k = 0; k < 60; ++k) {
        Lasso x = random_trace(ts, rng), y = random_trace(ts, rng);
        std::vector<const Lasso *> tr{&x, &y};
        if (react::holds(*f.premise, ts.signature(), tr)) CHECK(react::holds(*f.body, ts.signature(), tr));
      }
    }
  }
}

TEST_CASE("forall-forall failures survive adding behaviour")
{
  std::mt19937 rng(23);
  for (int round = 0; round < 30; ++round) {
    TransitionSystem ts = react_corpus::random_model(rng);
    // drop some edges, keeping each state's first one
    TransitionSystem sub(ts.signature());
    for (uint32_t s = 0; s < ts.size(); ++s) sub.add_state(ts.values(s));
    for (uint32_t s : ts.initial()) sub.add_initial(s);
    for (uint32_t s = 0; s < ts.size(); ++s)
      for (size_t k = 0; k < ts.succ(s).size(); ++k)
        if (k == 0 || rng() % 2) sub.add_edge(s, ts.succ(s)[k]);
    sub.finalize();
    Contract c = react_corpus::random_contract(rng);
    Vocabulary v(ts.signature(), c);
    for (Property p : {Property::Clean, Property::Robust, Property::FClean}) {
      HyperFormula f = strengthened(v, p);
      if (check_forall_forall(sub, f).truth == Truth::Fails) CHECK(check_forall_forall(ts, f).truth == Truth::Fails);
    }
  }
}

TEST_CASE("exists: guarantee")
{
  std::mt19937 rng(3);
  TransitionSystem ts = react_corpus::random_model(rng);
  Contract c;
  Vocabulary v(ts.signature(), c);
  FormulaResult r = check_exists(ts, guarantee(v, {I(0)}, {I(2)}));
  REQUIRE(r.truth == Truth::Holds);
  REQUIRE(r.witness);
  const Signature & sig = ts.signature();
  for (size_t k = 0; k < 10; ++k) {
    CHECK(sig.decode(r.witness->traces[0].at(k))[1] == I(0));
    CHECK(sig.decode(r.witness->traces[1].at(k))[1] == I(2));
  }
  // a model that never reads 2
  Signature s2 = react_corpus::sig3();
  TransitionSystem small(s2);
  uint32_t x = small.add_state({I(0), I(0), I(0)}), y = small.add_state({I(0), I(1), I(0)});
  small.add_initial(x);
  small.add_edge(x, y);
  small.add_edge(y, x);
  small.finalize();
  Vocabulary v2(s2, c);
  CHECK(check_exists(small, guarantee(v2, {I(0)}, {I(2)})).truth == Truth::Fails);
  CHECK(check_exists(small, guarantee(v2, {I(0)}, {I(0)})).truth == Truth::Fails);  // never constant
}

TEST_CASE("a single-trace model is clean in every mode")
{
  Signature sig;
  sig.add("p", Role::Param, lang::parse_domain("{0}"));
  sig.add("i", Role::Input, lang::parse_domain("{0}"));
  sig.add("o", Role::Output, lang::parse_domain("{0, 1}"));
  TransitionSystem ts(sig);
  uint32_t a = ts.add_state({I(0), I(0), I(0)}), b = ts.add_state({I(0), I(0), I(1)});
  ts.add_initial(a);
  ts.add_edge(a, b);
  ts.add_edge(b, b);
  ts.finalize();
  Contract c;
  c.kappa_out = V("0");
  for (Property p : {Property::Clean, Property::Robust, Property::FClean})
    for (Mode m : {Mode::Strengthen, Mode::Exact, Mode::Oracle}) {
      Options o;
      o.mode = m;
      Verdict v = check(ts, c, p, o);
      CHECK_MESSAGE(v.status == Status::Clean, property_name(p), " ", mode_name(m));
    }
}

TEST_CASE("one characterization failing is enough")
{
  TransitionSystem ts = one_sided_model();
  Contract c = one_sided_contract();
  Options o;
  o.mode = Mode::Exact;
  Verdict v = check(ts, c, Property::Robust, o);
  REQUIRE(v.instances.size() == 2);
  CHECK(v.instances[0].truth == Truth::Holds);
  CHECK(v.instances[1].truth == Truth::Fails);
  CHECK(v.status == Status::Doped);
  REQUIRE(v.witness);
  CHECK(v.witness->instance == "characterization-right");
  CHECK(replay(ts, c, Property::Robust, v));

  o.mode = Mode::Oracle;
  Verdict w = check(ts, c, Property::Robust, o);
  CHECK(w.status == Status::Doped);
  CHECK(replay(ts, c, Property::Robust, w));

  o.mode = Mode::Strengthen;
  Verdict s = check(ts, c, Property::Robust, o);
  CHECK(s.status == Status::Doped);
  CHECK(replay(ts, c, Property::Robust, s));

  // the negation instance with the standard input 0 against 1
  Vocabulary voc(ts.signature(), c);
  Verdict n = check_negation_instance(ts, voc, Property::Robust, Side::Right, {I(0)}, {I(1)});
  CHECK(n.instances.size() == 2);
  CHECK(n.status != Status::Clean);
  // the left side never fails, so its negation is refuted
  Verdict l = check_negation_instance(ts, voc, Property::Robust, Side::Left, {I(0)}, {I(1)});
  CHECK(l.instances[0].truth == Truth::Fails);
  CHECK(l.status == Status::Unknown);
}

TEST_CASE("gap between the prefix definitions and the formulas")
{
  TransitionSystem ts = react_corpus::gap_model();
  Contract c = react_corpus::gap_contract();
  Options o;
  o.mode = Mode::Oracle;
  Verdict orc = check(ts, c, Property::Robust, o);
  CHECK(orc.status == Status::Clean);
  CHECK(orc.complete);
  o.mode = Mode::Exact;
  Verdict ex = check(ts, c, Property::Robust, o);
  CHECK(ex.status == Status::Doped);
  CHECK(replay(ts, c, Property::Robust, ex));
}

TEST_CASE("modes on random receptive models")
{
  std::mt19937 rng(2024);
  int doped = 0, clean = 0;
  for (int round = 0; round < 60; ++round) {
    react_corpus::GenOptions g;
    g.nondet = round % 2;
    TransitionSystem ts = react_corpus::random_model(rng, g);
    REQUIRE(ts.receptive());
    Contract c = react_corpus::random_contract(rng);
    for (Property p : {Property::Clean, Property::Robust, Property::FClean}) {
      CAPTURE(round);
      CAPTURE(property_name(p));
      Options o;
      o.mode = Mode::Exact;
      Verdict ex = check(ts, c, p, o);
      o.mode = Mode::Oracle;
      Verdict orc = check(ts, c, p, o);
      o.mode = Mode::Strengthen;
      Verdict st = check(ts, c, p, o);
      REQUIRE(ex.status != Status::Unknown);
      REQUIRE(orc.status != Status::Unknown);
      // the formulas are at least as strong as the prefix definitions, and
      // exactly as strong for clean or without nondeterminism
      if (ex.status == Status::Clean) CHECK(orc.status == Status::Clean);
      if (p == Property::Clean || ts.deterministic()) CHECK(ex.status == orc.status);
      if (st.status == Status::Clean) CHECK(ex.status == Status::Clean);
      if (st.status == Status::Doped) CHECK(ex.status == Status::Doped);
      for (const Verdict * v : {&ex, &orc, &st})
        if (v->status == Status::Doped) CHECK(replay(ts, c, p, *v));
      (ex.status == Status::Doped ? doped : clean)++;
      // negation instances never contradict the exact verdict
      if (p != Property::Clean)
        for (Side s : {Side::Left, Side::Right}) {
          Vocabulary voc(ts.signature(), c);
          Verdict n = check_negation_instance(ts, voc, p, s, {I(int(rng() % 3))}, {I(int(rng() % 3))});
          if (n.status == Status::Doped) {
            CHECK(ex.status == Status::Doped);
            CHECK(replay(ts, c, p, n));
          }
        }
    }
  }
  // the corpus exercises both outcomes
  CHECK(doped > 10);
  CHECK(clean > 10);
}

TEST_CASE("results do not depend on the worker count")
{
  std::mt19937 rng(77);
  for (int round = 0; round < 10; ++round) {
    TransitionSystem ts = react_corpus::random_model(rng);
    Contract c = react_corpus::random_contract(rng);
    for (Mode m : {Mode::Strengthen, Mode::Exact}) {
      Options o;
      o.mode = m;
      set_jobs(1);
      Verdict a = check(ts, c, Property::Robust, o);
      set_jobs(4);
      Verdict b = check(ts, c, Property::Robust, o);
      CHECK(a.status == b.status);
      CHECK(a.explored == b.explored);
      CHECK(a.witness.has_value() == b.witness.has_value());
      if (a.witness && b.witness) CHECK(a.witness->traces == b.witness->traces);
    }
  }
  set_jobs(0);
}

TEST_CASE("oracle refuses what it cannot read")
{
  Signature sig = react_corpus::sig3();
  TransitionSystem ts(sig);
  uint32_t x = ts.add_state({I(0), I(0), I(0)});
  ts.add_initial(x);
  ts.add_edge(x, x);
  ts.finalize();
  Contract c;
  CHECK_THROWS_AS(bounded_oracle(ts, c, Property::Robust), UnsupportedError);
  std::mt19937 rng(1);
  TransitionSystem r = react_corpus::random_model(rng);
  c.d_in = Distance::dnew(Distance::abs_diff(), V("1"), nullptr);
  Options o;
  o.mode = Mode::Exact;
  CHECK_THROWS_AS(check(r, c, Property::FClean, o), UnsupportedError);
  o.mode = Mode::Oracle;
  CHECK(check(r, c, Property::FClean, o).status != Status::Unknown);
}
