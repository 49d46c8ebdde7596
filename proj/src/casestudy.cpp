#include "dope/casestudy.h"

#include <chrono>
#include <cmath>
#include <map>

#include "dope/errors.h"
#include "dope/lang/parser.h"

namespace dope::casestudy {

namespace {

using react::Role;

Value V(const char * s) { return Value::parse(s); }

bool divides(const Value & step, const Value & span)
{
  return step.mantissa() > 0 && span.mantissa() % step.mantissa() == 0;
}

}  // namespace

void EcuConfig::validate() const
{
  if (!(Value() < thrtl_step) || !divides(thrtl_step, thrtl_hi))
    throw DataError("throttle step " + thrtl_step.str() + " does not divide (0, " + thrtl_hi.str() + "]");
  if (!divides(thrtl_step, test_hi) || !(test_hi <= thrtl_hi))
    throw DataError("test range (0, " + test_hi.str() + "] is not on the throttle grid");
  if (!(Value() < nox_step)) throw DataError("NOx step must be positive");
  if (!(Value() < lambda && lambda < Value::integer(1))) throw DataError("lambda must lie in (0, 1)");
  if (!(Value() < k)) throw DataError("k must be positive");
}

Domain EcuConfig::thrtl_domain() const { return Domain::interval(Value(), true, thrtl_hi, false, thrtl_step); }

Domain EcuConfig::nox_domain() const
{
  double hi = (1 + lambda.to_double()) * thrtl_hi.to_double() * thrtl_hi.to_double() / k.to_double();
  int64_t n = int64_t(std::ceil(hi / nox_step.to_double() - 1e-9));
  return Domain::interval(Value(), false, Value::raw(n * nox_step.mantissa()), false, nox_step);
}

const char * ecu_name(Ecu e) { return e == Ecu::Ec ? "ec" : "aec"; }

Ecu parse_ecu(const std::string & s)
{
  if (s == "ec") return Ecu::Ec;
  if (s == "aec") return Ecu::Aec;
  throw DataError("unknown model '" + s + "' (ec or aec)");
}

std::string seq_source(Ecu e, const EcuConfig & cfg)
{
  cfg.validate();
  std::string s = e == Ecu::Ec ? "// Emission control, sequential form.\n"
                               : "// Emission control with a test-value branch.\n";
  s += "input thrtl in (0, " + cfg.thrtl_hi.str() + "] step " + cfg.thrtl_step.str() + ";\n";
  s += "var def_dose;\noutput NOx;\n\n";
  if (e == Ecu::Ec)
    s += "def_dose := thrtl^2;\n";
  else
    s += "if thrtl in (0, " + cfg.test_hi.str() + "] {\n  def_dose := thrtl^2\n} else {\n  def_dose := thrtl\n};\n";
  s += "NOx := thrtl^3 / (" + cfg.k.str() + " * def_dose)\n";
  return s;
}

lang::Program build_seq(Ecu e, const EcuConfig & cfg) { return lang::parse_program(seq_source(e, cfg)); }

std::vector<Value> nox_choices(Ecu e, const EcuConfig & cfg, const Value & thrtl, const Value & nox_prev)
{
  const double x = thrtl.to_double(), n = nox_prev.to_double();
  const double lam = cfg.lambda.to_double(), k = cfg.k.to_double();
  double dose;
  if (e == Ecu::Aec && thrtl > cfg.test_hi)
    dose = x;  // the alternative model ignores the feedback
  else
    dose = k * n <= x + 1e-12 ? x * x : (1 + lam) * x * x;
  const double mid = x * x * x / (k * dose);
  // grid points of the closed interval, ends snapped outward; the slack
  // absorbs floating point noise on ends that sit on the grid
  const double step = cfg.nox_step.to_double();
  int64_t lo = int64_t(std::floor((1 - lam) * mid / step + 1e-7));
  int64_t hi = int64_t(std::ceil((1 + lam) * mid / step - 1e-7));
  Domain d = cfg.nox_domain();
  std::vector<Value> out;
  for (int64_t j = std::max<int64_t>(lo, 0); j <= hi; ++j) {
    Value v = Value::raw(j * cfg.nox_step.mantissa());
    if (!d.contains(v)) throw DopeError("internal: NOx reading " + v.str() + " off the grid");
    out.push_back(v);
  }
  return out;
}

react::TransitionSystem build_react(Ecu e, const EcuConfig & cfg)
{
  cfg.validate();
  react::Signature sig;
  sig.add("thrtl", Role::Input, cfg.thrtl_domain());
  sig.add("NOx", Role::Output, cfg.nox_domain());
  react::TransitionSystem ts(sig);
  const Domain tdom = cfg.thrtl_domain();
  const auto & thrtls = tdom.points();
  std::map<std::pair<Value, Value>, uint32_t> id;
  std::vector<std::pair<Value, Value>> work;
  auto get = [&](const Value & t, const Value & n) {
    auto [it, fresh] = id.emplace(std::make_pair(t, n), 0);
    if (fresh) {
      it->second = ts.add_state({t, n});
      work.push_back({t, n});
    }
    return it->second;
  };
  for (const Value & t : thrtls)
    for (const Value & n : nox_choices(e, cfg, t, Value())) ts.add_initial(get(t, n));
  // successors depend on the last reading only
  std::map<Value, std::vector<uint32_t>> next;
  while (!work.empty()) {
    auto [t, n] = work.back();
    work.pop_back();
    uint32_t s = id[{t, n}];
    auto it = next.find(n);
    if (it == next.end()) {
      std::vector<uint32_t> succ;
      for (const Value & t2 : thrtls)
        for (const Value & n2 : nox_choices(e, cfg, t2, n)) succ.push_back(get(t2, n2));
      it = next.emplace(n, std::move(succ)).first;
    }
    for (uint32_t x : it->second) ts.add_edge(s, x);
  }
  ts.finalize();
  return ts;
}

// ---- printers

const char * printer_name(Printer p)
{
  switch (p) {
    case Printer::General: return "general";
    case Printer::Doped: return "doped";
    case Printer::Extended: return "extended";
  }
  return "?";
}

Printer parse_printer(const std::string & s)
{
  if (s == "general") return Printer::General;
  if (s == "doped") return Printer::Doped;
  if (s == "extended") return Printer::Extended;
  throw DataError("unknown printer '" + s + "' (general, doped or extended)");
}

std::string printer_source(Printer p)
{
  std::string head =
      "param ctype in {0, 1, 2};\n"
      "param brand in {0, 1};\n"
      "param supports_new in {0, 1};\n"
      "input doc in {1, 2, 3};\n"
      "input new_type in {0, 1};\n"
      "output out;\n"
      "const ALERT = 0;\n\n";
  switch (p) {
    case Printer::General:
      return "// Printer: prints whenever the cartridge type is compatible.\n"
             "// ctype 0 and 1 are the Compatible types, 2 is not; brand 1 is my-brand.\n"
             + head + "if ctype <= 1 {\n  out := doc\n} else {\n  out := ALERT\n}\n";
    case Printer::Doped:
      return "// Printer that only prints with cartridges of its own brand.\n" + head
             + "if brand == 1 {\n  out := doc\n} else {\n  out := ALERT\n}\n";
    case Printer::Extended:
      return "// Printer with a new document format that needs cartridge support.\n" + head
             + "if ctype <= 1 {\n"
               "  if new_type == 0 || supports_new == 1 {\n"
               "    out := doc\n"
               "  } else {\n"
               "    out := ALERT\n"
               "  }\n"
               "} else {\n"
               "  out := ALERT\n"
               "}\n";
  }
  return "";
}

lang::Program build_printer(Printer p) { return lang::parse_program(printer_source(p)); }

Contract ecu_contract(bool reactive, const EcuConfig & cfg)
{
  Contract c;
  std::string range = "thrtl in (0, " + cfg.test_hi.str() + "]";
  c.kappa_in = Value::integer(2);
  if (reactive) {
    c.stdin_spec = "G(" + range + ")";
    c.d_in = Distance::past_forgetful(Distance::abs_diff());
    c.d_out = Distance::past_forgetful(Distance::abs_diff());
    c.kappa_out = V("1.1");
    c.f = BoundFn::affine(V("0.5"), V("0.3"));
  } else {
    c.stdin_spec = range;
    c.comm = "thrtl in (" + cfg.test_hi.str() + ", " + cfg.thrtl_hi.str() + "]";
    c.kappa_out = Value::integer(1);
    c.f = BoundFn::affine(V("0.5"), Value());
  }
  c.scale = 1;
  return c;
}

Contract printer_contract(Printer p)
{
  Contract c;
  c.pintrs.predicate = "ctype <= 1";
  c.stdin_spec = p == Printer::Extended ? "new_type == 0" : "true";
  c.d_in = Distance::discrete(Value::integer(1));
  c.d_out = Distance::discrete(Value::integer(1));
  return c;
}

// ---- table

std::vector<TableRow> run_table(const TableOptions & o)
{
  using namespace hyper;
  std::vector<TableRow> rows;
  for (const Value & step : o.nox_steps)
    for (Ecu e : o.programs) {
      EcuConfig cfg;
      cfg.thrtl_step = o.thrtl_step;
      cfg.nox_step = step;
      react::TransitionSystem ts = build_react(e, cfg);
      Contract c = ecu_contract(true, cfg);
      Vocabulary voc(ts.signature(), c);
      for (Property p : o.properties) {
        auto row = [&](const std::string & inst) {
          TableRow r;
          r.program = ecu_name(e);
          r.nox_step = step;
          r.transitions = ts.edge_count();
          r.property = property_name(p);
          r.instance = inst;
          return r;
        };
        if (e == Ecu::Ec) {
          TableRow r = row("strengthened");
          r.expected = Status::Clean;
          auto t0 = std::chrono::steady_clock::now();
          Options opt;
          Verdict v = check(ts, c, p, opt);
          r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
          // the row is the strengthened formula alone
          r.got = v.instances.at(0).truth == Truth::Holds ? Status::Clean : Status::Doped;
          r.explored = v.explored;
          r.reason = v.reason;
          rows.push_back(std::move(r));
          continue;
        }
        for (const Value & a : o.a)
          for (Side s : {Side::Left, Side::Right}) {
            TableRow r = row(std::string("negation-") + (s == Side::Left ? "left" : "right") + " a=" + a.str());
            r.expected = Status::Doped;
            auto t0 = std::chrono::steady_clock::now();
            Verdict v = check_negation_instance(ts, voc, p, s, {a}, {o.b});
            r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            r.got = v.status;
            r.explored = v.explored;
            r.reason = v.reason;
            rows.push_back(std::move(r));
          }
      }
    }
  return rows;
}

}  // namespace dope::casestudy
