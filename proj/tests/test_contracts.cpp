#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <random>

#include "dope/contract.h"
#include "dope/domain.h"
#include "dope/errors.h"
#include "dope/hausdorff.h"

using namespace dope;

namespace {

Value V(const char * s) { return Value::parse(s); }

std::vector<Valuation> pts(std::initializer_list<const char *> xs)
{
  std::vector<Valuation> out;
  for (auto x : xs) out.push_back({V(x)});
  return out;
}

// Textbook definition, no early exit, doubles on small integers only.
double naive_hausdorff(const std::vector<long> & A, const std::vector<long> & B)
{
  if (A.empty() && B.empty()) return 0;
  if (A.empty() || B.empty()) return 1e300;
  double h = 0;
  for (long a : A) {
    double m = 1e300;
    for (long b : B) m = std::min(m, double(std::labs(a - b)));
    h = std::max(h, m);
  }
  for (long b : B) {
    double m = 1e300;
    for (long a : A) m = std::min(m, double(std::labs(a - b)));
    h = std::max(h, m);
  }
  return h;
}

}  // namespace

TEST_CASE("value arithmetic is exact on the 1e-6 grid")
{
  CHECK(V("0.1") + V("0.2") == V("0.3"));
  CHECK(V("1.5").pow(3) == V("3.375"));
  CHECK(V("3.375") / V("3") == V("1.125"));
  CHECK(V("1") / V("3") == V("0.333333"));
  CHECK(V("2") / V("3") == V("0.666667"));
  CHECK(V("-2") / V("3") == V("-0.666667"));
  CHECK((V("0.5") - V("0.75")).abs() == V("0.25"));
  CHECK(V("7") < Value::infinity());
  CHECK(Value::infinity() + V("1") == Value::infinity());
  CHECK(V("0.1").str() == "0.1");
  CHECK(V("-3").str() == "-3");
  CHECK(Value::infinity().str() == "inf");
  CHECK_THROWS_AS(V("1") / Value(), DopeError);
  CHECK_THROWS_AS(V("0.0000001"), DataError);
}

TEST_CASE("domain grids")
{
  Domain d = Domain::interval(V("0"), true, V("2"), false, V("0.1"));
  CHECK(d.size() == 20);
  CHECK(d.points().front() == V("0.1"));
  CHECK(d.points().back() == V("2"));
  CHECK(d.snap(V("0.15")) == V("0.2"));  // ties go up
  CHECK(d.snap(V("0.149")) == V("0.1"));
  CHECK(d.snap(V("7")) == V("2"));
  CHECK(d.points_in(V("0.45"), V("0.55")).size() == 3);  // 0.4 0.5 0.6
  CHECK(d.str() == "(0, 2] step 0.1");
  Domain s = Domain::set({V("2"), V("0"), V("1")});
  CHECK(s.points() == std::vector<Value>{V("0"), V("1"), V("2")});
  CHECK(s.snap(V("0.4")) == V("0"));
  auto prod = product({&s, &s});
  CHECK(prod.size() == 9);
  CHECK(prod[1] == Valuation{V("0"), V("1")});
}

TEST_CASE("hausdorff operation examples")
{
  Distance d;
  CHECK(hausdorff(d, pts({"0.5"}), pts({"0.5"})) == Value());
  CHECK(hausdorff(d, pts({"0", "1"}), pts({"0"})) == V("1"));
  CHECK(hausdorff(d, pts({"0.45", "0.55"}), pts({"0.5", "0.6"})) == V("0.05"));
  CHECK(hausdorff(d, {}, {}) == Value());
  CHECK(hausdorff(d, {}, pts({"1"})).is_inf());
  CHECK(hausdorff_two_clause(d, pts({"1"}), pts({"1"}), Value()));
  CHECK_FALSE(hausdorff_two_clause(d, pts({"0", "1"}), pts({"0"}), V("0.5")));
  CHECK(hausdorff_two_clause(d, pts({"0", "1"}), pts({"0"}), V("1")));
}

TEST_CASE("hausdorff agrees with a naive evaluation and is symmetric")
{
  std::mt19937 rng(7);
  Distance d;
  for (int n = 0; n < 2000; ++n) {
    std::vector<long> a(rng() % 5), b(rng() % 5);
    for (auto & x : a) x = long(rng() % 21) - 10;
    for (auto & x : b) x = long(rng() % 21) - 10;
    std::vector<Valuation> A, B;
    for (long x : a) A.push_back({Value::integer(x)});
    for (long x : b) B.push_back({Value::integer(x)});
    Value h = hausdorff(d, A, B);
    double ref = naive_hausdorff(a, b);
    if (ref > 1e299)
      CHECK(h.is_inf());
    else
      CHECK(h == Value::integer(long(ref)));
    CHECK(h == hausdorff(d, B, A));
    if (!A.empty()) CHECK(hausdorff(d, A, A) == Value());
  }
}

TEST_CASE("distance axioms over a grid")
{
  Domain g = Domain::interval(V("0"), false, V("1"), false, V("0.25"));
  std::vector<Distance> ds = {
      Distance::abs_diff(), Distance::discrete(V("3")),
      Distance::custom({{{V("0")}, {V("1")}, V("0.7")}}, V("2"))};
  for (auto & d : ds)
    for (auto & a : g.points())
      for (auto & b : g.points()) {
        CHECK(d({a}, {b}) == d({b}, {a}));
        if (a == b) CHECK(d({a}, {b}) == Value());
      }
  CHECK(ds[2]({V("1")}, {V("0")}) == V("0.7"));
  CHECK(ds[2]({V("1")}, {V("0.5")}) == V("2"));
  CHECK(Distance()({V("1"), V("5")}, {V("0.5"), V("3")}) == V("2"));  // L-inf
  CHECK_THROWS_AS(Distance::custom({{{V("0")}, {V("0")}, V("1")}}, V("1")), DataError);
  CHECK_THROWS_AS(Distance::custom({{{V("0")}, {V("1")}, V("1")},
                                    {{V("1")}, {V("0")}, V("2")}},
                                   V("1")),
                  DataError);
}

TEST_CASE("d_In^new three cases")
{
  // standard traces: every element <= 1
  TracePredicate std_pred = [](const FiniteTrace & t) {
    for (auto & x : t)
      if (x[0] > V("1")) return false;
    return true;
  };
  Distance dn = Distance::dnew(Distance::abs_diff(), V("0.5"), std_pred);
  FiniteTrace a = {{V("0.5")}, {V("1")}};
  CHECK(dn.on_traces(a, a) == Value());
  FiniteTrace b = {{V("0.5")}, {V("1.3")}};
  CHECK(dn.on_traces(a, b) == V("1"));
  CHECK(dn.on_traces(b, a) == V("1"));
  FiniteTrace c = {{V("1.5")}, {V("1.8")}};
  FiniteTrace e = {{V("1.5")}, {V("1.9")}};
  CHECK(dn.on_traces(c, e) == V("2"));
  FiniteTrace far = {{V("0.5")}, {V("1.9")}};
  CHECK(dn.on_traces(a, far) == V("2"));  // last prefix beyond kappa
  Distance pf = Distance::past_forgetful(Distance::abs_diff());
  CHECK(pf.on_traces(a, far) == V("0.9"));
}

TEST_CASE("bound functions")
{
  BoundFn t = BoundFn::threshold(V("2"), V("1"));
  for (int k = 0; k <= 40; ++k) {
    Value x = Value::raw(k * 100000);
    if (x <= V("2"))
      CHECK(t(x) == V("1"));
    else
      CHECK(t(x).is_inf());
  }
  BoundFn half = BoundFn::affine(V("0.5"), Value());
  CHECK(half(V("0.5")) == V("0.25"));
  CHECK(half(Value::infinity()).is_inf());
  BoundFn steps = BoundFn::custom({{V("0"), V("1")}, {V("1"), V("3")}});
  CHECK(steps(V("0.5")) == V("1"));
  CHECK(steps(V("1")) == V("3"));
  CHECK(BoundFn()(V("5")).is_inf());
}

TEST_CASE("contract json round trip")
{
  Contract c;
  c.pintrs.valuations = std::vector<std::map<std::string, Value>>{
      {{"ctype", V("0")}, {"brand", V("1")}}};
  c.stdin_spec = "thrtl in (0, 1]";
  c.comm = "thrtl in (1, 2]";
  c.d_in = Distance::custom({{{V("0")}, {V("1")}, V("0.5")}}, V("4"));
  c.d_out = Distance::past_forgetful(Distance::discrete(V("2")));
  c.kappa_in = V("2");
  c.kappa_out = Value::infinity();
  c.f = BoundFn::affine(V("0.5"), V("0.3"));
  c.scale = 2;
  Contract d = contract_from_json(nlohmann::json::parse(dump_contract(c)));
  CHECK(d == c);
  CHECK(dump_contract(d) == dump_contract(c));
  CHECK_THROWS_AS(contract_from_json(nlohmann::json::parse(R"({"kapa_in": 1})")),
                  DataError);
  CHECK_THROWS_AS(
      contract_from_json(nlohmann::json::parse(R"({"kappa_in": 0.125, "scale": 2})")),
      DataError);
  CHECK_THROWS_AS(load_contract("/nonexistent/contract.json"), DataError);
}
