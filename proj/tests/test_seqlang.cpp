#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <random>

#include "dope/errors.h"
#include "dope/lang/eval.h"
#include "dope/lang/parser.h"

using namespace dope;
using namespace dope::lang;

namespace {

Value V(const char * s) { return Value::parse(s); }

const char * kEc = R"(
input thrtl in (0, 2] step 0.1;
var def_dose;
output NOx;
def_dose := thrtl^2;
NOx := thrtl^3 / (2 * def_dose)
)";

const char * kAec = R"(
input thrtl in (0, 2] step 0.1;
var def_dose;
output NOx;
if thrtl in (0, 1] { def_dose := thrtl^2 } else { def_dose := thrtl };
NOx := thrtl^3 / (2 * def_dose)
)";

std::set<Valuation> single(const char * v) { return {{V(v)}}; }

}  // namespace

TEST_CASE("parse examples")
{
  Program p = parse_program("output y; input x; y := x");
  CHECK(p.decls.size() == 2);
  CHECK(p.body->kind == StmtKind::Assign);

  Program ec = parse_program(kEc);
  REQUIRE(ec.body->kind == StmtKind::Seq);
  CHECK(ec.body->items.size() == 2);
  CHECK(to_string(*ec.body->items[1]) == "NOx := thrtl^3 / (2 * def_dose)");

  CHECK_THROWS_AS(parse_program("output y; y := z"), SemanticError);
  try {
    parse_program("output y; y := z");
  } catch (const SemanticError & e) {
    CHECK(e.variable() == "z");
  }
}

TEST_CASE("parse errors carry positions and role violations name the variable")
{
  try {
    parse_program("output y;\ny := (1 + ;");
    FAIL("no error");
  } catch (const ParseError & e) {
    CHECK(e.line() == 2);
    CHECK(e.col() == 11);
  }
  try {
    parse_program("input x; output y; x := 1");
    FAIL("no error");
  } catch (const SemanticError & e) {
    CHECK(e.variable() == "x");
  }
  CHECK_THROWS_AS(parse_program("param p; output y; p := 1"), SemanticError);
  CHECK_THROWS_AS(parse_program("output y; y :in [0, 1]"), SemanticError);
  CHECK_THROWS_AS(parse_program("output y; y := 1 < 2"), ParseError);
  CHECK_THROWS_AS(parse_program("output y; if 1 { skip }"), ParseError);
  CHECK_THROWS_AS(parse_program("output y; output y; skip"), SemanticError);
}

TEST_CASE("eval examples")
{
  Program ec = parse_program(kEc), aec = parse_program(kAec);
  CHECK(eval(ec, {}, {V("1")}).outputs == single("0.5"));
  CHECK(eval(ec, {}, {V("0.5")}).outputs == single("0.25"));
  CHECK(eval(aec, {}, {V("1.5")}).outputs == single("1.125"));
  CHECK(eval(aec, {}, {V("0.5")}).outputs == single("0.25"));

  Program loop = parse_program("output y; while true { skip }");
  for (size_t b : {1, 10, 1000}) {
    Outcome o = eval(loop, {}, {}, b);
    CHECK(o.diverged);
    CHECK(o.outputs.empty());
  }
}

TEST_CASE("nondeterministic assignment enumerates the grid")
{
  Program p = parse_program(R"(
    input x in {1, 2};
    output y in [0, 3] step 0.05;
    y :in [0.9 * x / 2, 1.1 * x / 2]
  )");
  Outcome o = eval(p, {}, {V("1")});
  CHECK(o.outputs == std::set<Valuation>{{V("0.45")}, {V("0.5")}, {V("0.55")}});
  // outward snapping of interval ends
  Program q = parse_program("output y in [0, 1] step 0.1; y :in [0.25, 0.31]");
  CHECK(eval(q, {}, {}).outputs.size() == 3);  // 0.2 0.3 0.4
}

TEST_CASE("off-grid assignment snaps with a warning; division by zero names the statement")
{
  Program p = parse_program("output y in [0, 1] step 0.5; y := 0.3");
  Outcome o = eval(p, {}, {});
  CHECK(o.outputs == single("0.5"));
  CHECK(o.warnings.size() == 1);

  Program z = parse_program("input x in {0, 1}; output y;\ny := 1 / x");
  try {
    eval(z, {}, {V("0")});
    FAIL("no error");
  } catch (const EvalError & e) {
    CHECK(std::string(e.what()).find("y := 1 / x") != std::string::npos);
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }
}

TEST_CASE("budget monotonicity and determinism")
{
  Program p = parse_program(R"(
    input n in {0, 1, 2, 3, 4, 5};
    var k = 0;
    output y;
    while k < n { k := k + 1; y := y + 2 }
  )");
  for (Value n : {V("0"), V("3"), V("5")}) {
    std::optional<Outcome> first;
    for (size_t b = 1; b < 40; ++b) {
      Outcome o = eval(p, {}, {n}, b);
      CHECK(o.outputs.size() + (o.diverged ? 1 : 0) == 1);
      if (!o.diverged && !first) first = o;
      if (first) CHECK(o == *first);
    }
    REQUIRE(first);
    CHECK(*first->outputs.begin() == Valuation{n * V("2")});
  }
}

TEST_CASE("pretty print round trip")
{
  const char * sources[] = {
      kEc,
      kAec,
      "param p in {0, 1}; input x in [-1, 1] step 0.5; output y in [-2, 2] step 0.25 = 1;"
      "var t = -0.5; const K = 3;"
      "if p == 1 && !(x < 0) || x in [0, 1) { y := -x * K - (x - 1) } else if x != 0 { y := abs(x) ^ 2 };"
      "while t < 1 => false { t := t + 0.5; y :in [x - 1, -x / 2] }",
      "output y; skip",
      "input a; input b; output y; y := a - (b - a) - -a * (a / (b * a))",
  };
  for (auto src : sources) {
    Program p = parse_program(src);
    std::string text = pretty_print(p);
    Program q = parse_program(text);
    CHECK_MESSAGE(equal(p, q), text);
    CHECK(pretty_print(q) == text);
  }
}

TEST_CASE("random expressions survive printing")
{
  std::mt19937 rng(11);
  NameResolver names = [](const std::string & n) { return n == "a" ? 0 : n == "b" ? 1 : -1; };
  std::function<std::string(int)> gen_num, gen_bool;
  gen_num = [&](int depth) -> std::string {
    int r = depth <= 0 ? int(rng() % 3) : int(rng() % 9);
    switch (r) {
      case 0: return "a";
      case 1: return "b";
      case 2: return std::to_string(rng() % 5) + "." + std::to_string(rng() % 10);
      case 3: return "(" + gen_num(depth - 1) + " + " + gen_num(depth - 1) + ")";
      case 4: return "(" + gen_num(depth - 1) + " - " + gen_num(depth - 1) + ")";
      case 5: return "(" + gen_num(depth - 1) + " * " + gen_num(depth - 1) + ")";
      case 6: return "(" + gen_num(depth - 1) + " / " + gen_num(depth - 1) + ")";
      case 7: return "-(" + gen_num(depth - 1) + ")";
      default: return "abs(" + gen_num(depth - 1) + ")^" + std::to_string(rng() % 3);
    }
  };
  gen_bool = [&](int depth) -> std::string {
    int r = depth <= 0 ? 0 : int(rng() % 5);
    switch (r) {
      case 0: return "(" + gen_num(2) + " <= " + gen_num(2) + ")";
      case 1: return "(" + gen_bool(depth - 1) + " && " + gen_bool(depth - 1) + ")";
      case 2: return "(" + gen_bool(depth - 1) + " || " + gen_bool(depth - 1) + ")";
      case 3: return "!(" + gen_bool(depth - 1) + ")";
      default: return "(" + gen_bool(depth - 1) + " => " + gen_bool(depth - 1) + ")";
    }
  };
  for (int n = 0; n < 500; ++n) {
    ExprP e = parse_expr(gen_bool(3), names);
    ExprP f = parse_expr(to_string(*e), names);
    CHECK_MESSAGE(equal(*e, *f), to_string(*e));
  }
}

TEST_CASE("temporal formulas parse only in temporal mode")
{
  NameResolver names = [](const std::string & n) { return n == "t" ? 0 : -1; };
  ExprP g = parse_expr("G(t in (0, 1])", names, true);
  CHECK(g->op == Op::Globally);
  CHECK(to_string(*g) == "G(t in (0, 1])");
  ExprP w = parse_expr("t <= 1 W X t > 1", names, true);
  CHECK(w->op == Op::WeakUntil);
  CHECK(equal(*parse_expr(to_string(*w), names, true), *w));
  CHECK_THROWS_AS(parse_expr("G(t < 1)", names), DataError);
}
