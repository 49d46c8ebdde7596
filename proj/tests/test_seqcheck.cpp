#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <random>

#include "corpus.h"
#include "dope/errors.h"
#include "dope/parallel.h"
#include "dope/seqcheck.h"

using namespace dope;
using lang::Program;

namespace {

Value V(const char * s) { return Value::parse(s); }

std::string data(const char * f) { return std::string(DOPE_DATA_DIR) + "/" + f; }

Contract ex1() { return load_contract(data("contract_ex1.json")); }

Contract ex2()
{
  Contract c = ex1();
  c.f = BoundFn::affine(V("0.5"), Value());
  return c;
}

// Brute-force reading of the clean, robust and f-clean definitions with
// shuffled tuple order; sets are compared with a quadratic Hausdorff that
// has no shortcuts.
Status oracle(const Program & p, const Contract & c, SeqProperty prop, unsigned seed)
{
  auto params = parameter_space(p, c);
  std::vector<const Domain *> doms;
  for (size_t k : p.of_role(lang::Role::Input)) doms.push_back(&p.decls[k].domain);
  auto inputs = product(doms);
  auto std_pred = role_predicate(p, lang::Role::Input, c.stdin_spec);
  struct T { size_t p, p2, i, i2; };
  std::vector<T> tuples;
  for (size_t a = 0; a < params.size(); ++a)
    for (size_t b = 0; b < params.size(); ++b)
      for (size_t i = 0; i < inputs.size(); ++i)
        for (size_t j = 0; j < inputs.size(); ++j) tuples.push_back({a, b, i, j});
  std::shuffle(tuples.begin(), tuples.end(), std::mt19937(seed));
  bool unknown = false;
  for (auto & t : tuples) {
    lang::Env env{inputs[t.i].data(), nullptr};
    if (!lang::eval_bool(*std_pred, env)) continue;
    if (prop == SeqProperty::Clean && t.i != t.i2) continue;
    Value din = c.d_in(inputs[t.i], inputs[t.i2]);
    Value bound = prop == SeqProperty::Clean    ? Value()
                  : prop == SeqProperty::Robust ? (din <= c.kappa_in ? c.kappa_out : Value::infinity())
                                                : (*c.f)(din);
    if (bound.is_inf()) continue;
    auto A = lang::eval(p, params[t.p], inputs[t.i]);
    auto B = lang::eval(p, params[t.p2], inputs[t.i2]);
    if (A.diverged || B.diverged) {
      unknown = true;
      continue;
    }
    if (prop == SeqProperty::Clean) {
      if (A.outputs != B.outputs) return Status::Doped;
      continue;
    }
    Value h;
    for (int side = 0; side < 2; ++side)
      for (auto & a : side ? B.outputs : A.outputs) {
        Value m = Value::infinity();
        for (auto & b : side ? A.outputs : B.outputs) m = std::min(m, c.d_out(a, b));
        h = std::max(h, m);
      }
    if (bound < h) return Status::Doped;
  }
  return unknown ? Status::Unknown : Status::Clean;
}

}  // namespace

TEST_CASE("ec robustly clean, aec not")
{
  Program ec = lang::load_program(data("ec.dope"));
  Program aec = lang::load_program(data("aec.dope"));
  CHECK(check_robustly_clean(ec, ex1()).status == Status::Clean);
  SeqVerdict v = check_robustly_clean(aec, ex1());
  CHECK(v.status == Status::Doped);
  REQUIRE(v.witness);
  CHECK(replay_witness(aec, ex1(), SeqProperty::Robust, *v.witness));
  CHECK(oracle(ec, ex1(), SeqProperty::Robust, 1) == Status::Clean);
  CHECK(oracle(aec, ex1(), SeqProperty::Robust, 1) == Status::Doped);
}

TEST_CASE("f-cleanness with f(x) = x/2")
{
  Program ec = lang::load_program(data("ec.dope"));
  Program aec = lang::load_program(data("aec.dope"));
  CHECK(check_f_clean(ec, ex2()).status == Status::Clean);
  SeqVerdict v = check_f_clean(aec, ex2());
  CHECK(v.status == Status::Doped);
  REQUIRE(v.witness);
  CHECK(replay_witness(aec, ex2(), SeqProperty::FClean, *v.witness));

  // the pair named in the text is itself a violation: |1/2 - 1.5^2/2| > 0.25
  SeqChecker ch(aec, ex2());
  size_t i1 = 9, i15 = 14;
  REQUIRE(ch.inputs()[i1] == Valuation{V("1")});
  REQUIRE(ch.inputs()[i15] == Valuation{V("1.5")});
  SeqWitness w{{}, {}, {V("1")}, {V("1.5")}, {{V("0.5")}}, {{V("1.125")}}, false, false,
               V("0.625"), V("0.25"), 0};
  CHECK(replay_witness(aec, ex2(), SeqProperty::FClean, w));

  Contract inf = ex2();
  inf.f = BoundFn::constant(Value::infinity());
  CHECK(check_f_clean(aec, inf).status == Status::Clean);
}

TEST_CASE("printers under plain cleanness")
{
  Contract c = load_contract(data("contract_printer.json"));
  Program general = lang::load_program(data("printer_general.dope"));
  Program doped = lang::load_program(data("printer_doped.dope"));
  Program ext = lang::load_program(data("printer_extended.dope"));
  CHECK(check_clean(general, c).status == Status::Clean);
  SeqVerdict v = check_clean(doped, c);
  CHECK(v.status == Status::Doped);
  REQUIRE(v.witness);
  CHECK(replay_witness(doped, c, SeqProperty::Clean, *v.witness));
  // compatible non-my-brand cartridge gets the alert
  CHECK(v.witness->out1 != v.witness->out2);
  CHECK(check_clean(ext, c).status == Status::Doped);
  CHECK(check_clean(ext, load_contract(data("contract_printer_std.json"))).status == Status::Clean);

  Program free = lang::parse_program("input x in {0, 1, 2}; output y; y := 2 * x");
  CHECK(check_clean(free, c = Contract()).status == Status::Clean);
}

TEST_CASE("nontermination is an outcome of its own")
{
  Program p = lang::parse_program(R"(
    param q in {0, 1};
    input x in {0, 1};
    output y;
    while q == 1 && x == 1 { skip };
    y := x
  )");
  Contract c;
  SeqVerdict v = check_clean(p, c, {1000, std::nullopt});
  CHECK(v.status == Status::Unknown);  // one side exhausted, the other finished with 1
  Program both = lang::parse_program(R"(
    param q in {0, 1};
    input x in {0, 1};
    output y;
    while x == 1 { skip };
    y := x
  )");
  CHECK(check_clean(both, c, {1000, std::nullopt}).status == Status::Clean);
}

TEST_CASE("general cleanness")
{
  Program ec = lang::load_program(data("ec.dope"));
  Contract c = load_contract(data("contract_ex2.json"));
  SeqVerdict v = check_general_clean(ec, c);
  // items 1-2 hold; inputs outside StdIn and Comm do not exist here
  CHECK(v.status == Status::Clean);

  Contract only_std;
  SeqVerdict r = check_general_clean(lang::parse_program("input x in {0, 1}; output y; y := x"), only_std);
  CHECK(r.status == Status::Clean);  // comm empty, In = StdIn

  Program jump = lang::parse_program(R"(
    input x in [0, 3] step 0.1;
    output y;
    if x < 2.5 { y := x } else { y := x + 5 }
  )");
  Contract j;
  j.stdin_spec = "x <= 1";
  j.comm = "x > 1 && x <= 2";
  j.f = BoundFn::affine(V("1"), Value());
  SeqVerdict u = check_general_clean(jump, j);
  CHECK(u.status == Status::Unknown);
  REQUIRE(u.continuity);
  CHECK(*u.continuity == V("5.1"));
  CHECK(*u.resolution == V("0.1"));
  SeqVerdict d = check_general_clean(jump, j, {lang::kDefaultBudget, V("1")});
  CHECK(d.status == Status::Doped);
  REQUIRE(d.witness);
  CHECK(d.witness->item == 3);
  CHECK(replay_witness(jump, j, SeqProperty::General, *d.witness));

  Contract overlap = j;
  overlap.comm = "x >= 1";
  CHECK_THROWS_AS(check_general_clean(jump, overlap), DataError);
}

TEST_CASE("subsumption and oracle agreement on a random corpus")
{
  int programs = 0;
  for (unsigned seed = 1; programs < 80; ++seed) {
    corpus::Gen g(seed);
    Program p = lang::parse_program(g.program());
    Contract c = g.contract();
    ++programs;
    SeqChecker ch(p, c);
    Status clean = ch.clean().status;
    Status robust = ch.robust().status;
    Status fclean = ch.f_clean().status;
    CHECK(clean == oracle(p, c, SeqProperty::Clean, seed));
    CHECK(robust == oracle(p, c, SeqProperty::Robust, seed));
    CHECK(fclean == oracle(p, c, SeqProperty::FClean, seed));

    // cleanness as robust cleanness with degenerate distances
    Contract a = c;
    a.d_in = Distance::discrete(c.kappa_in + V("1"));
    a.d_out = Distance::discrete(c.kappa_out + V("1"));
    CHECK(check_robustly_clean(p, a).status == clean);

    // robust cleanness as f-cleanness with the threshold bound
    Contract b = c;
    b.f = BoundFn::threshold(c.kappa_in, c.kappa_out);
    CHECK(check_f_clean(p, b).status == robust);

    for (auto prop : {SeqProperty::Clean, SeqProperty::Robust, SeqProperty::FClean}) {
      SeqVerdict v = ch.check(prop);
      if (v.status == Status::Doped) {
        REQUIRE(v.witness);
        CHECK(replay_witness(p, c, prop, *v.witness));
      }
    }
  }
}

TEST_CASE("verdicts do not depend on the worker count")
{
  for (unsigned seed = 200; seed < 220; ++seed) {
    corpus::Gen g(seed);
    Program p = lang::parse_program(g.program());
    Contract c = g.contract();
    set_jobs(1);
    SeqVerdict a = check_robustly_clean(p, c);
    set_jobs(4);
    SeqVerdict b = check_robustly_clean(p, c);
    CHECK(a.status == b.status);
    if (a.witness && b.witness) {
      CHECK(a.witness->i == b.witness->i);
      CHECK(a.witness->i2 == b.witness->i2);
    }
  }
  set_jobs(0);
}
