#include <algorithm>
#include <chrono>

#include "dope/errors.h"
#include "internal.h"

namespace dope::hyper {

using namespace detail;

const char * mode_name(Mode m)
{
  switch (m) {
    case Mode::Strengthen: return "strengthen";
    case Mode::Exact: return "exact";
    case Mode::Oracle: return "oracle";
  }
  return "?";
}

Mode parse_mode(const std::string & s)
{
  if (s == "strengthen") return Mode::Strengthen;
  if (s == "exact") return Mode::Exact;
  if (s == "oracle") return Mode::Oracle;
  throw DataError("unknown mode '" + s + "' (strengthen, exact or oracle)");
}

namespace {

double since(std::chrono::steady_clock::time_point t0)
{
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string values_str(const Valuation & v)
{
  return v.size() == 1 ? v[0].str() : to_string(v);
}

// Does the characterization `name` have a partner for the pair (t1, t2)?
bool has_partner(const TransitionSystem & ts, const Vocabulary & v, Property p, const std::string & name,
                 const Lasso & t1, const Lasso & t2)
{
  if (p == Property::Clean)
    return exists_partner(ts, v.condition(p, 0, 1), {&t1}, 1, t2, t1);
  if (name == "characterization-left") return exists_partner(ts, v.condition(p, 0, 1), {&t1}, 1, t2, t2);
  return exists_partner(ts, v.condition(p, 0, 1), {&t2}, 0, t1, t1);
}

}  // namespace

Verdict check_negation_instance(const TransitionSystem & ts, const Vocabulary & v, Property p, Side s,
                                const Valuation & a, const Valuation & b)
{
  using namespace react;
  if (!v.past_forgetful()) throw UnsupportedError("dnew distances are only supported by the oracle mode");
  Verdict out;
  out.property = p;
  out.mode = Mode::Strengthen;
  const std::string side = s == Side::Left ? "left" : "right";
  const std::string tag = "a=" + values_str(a) + " b=" + values_str(b);
  HyperFormula inst = negation_instance(v, p, s, a, b);
  const Characterization c = characterizations(v, p)[s == Side::Left ? 0 : 1];

  // A counterexample to the instance is a triple with inputs a and b where
  // the characterization's implication holds. StdIn on a constant input is
  // decided by the monitor; the rest is an exists^3 safety query.
  auto t0 = std::chrono::steady_clock::now();
  Monitor mon(v.sig(), v.contract().stdin_spec);
  v.input_is(0, a);  // validates a
  Valuation full = v.sig().letter_values(Role::Input, 0);
  const auto & sel = v.sig().of_role(Role::Input);
  for (size_t k = 0; k < sel.size(); ++k) full[sel[k]] = a[k];
  bool std_a = mon.accepts({}, {v.sig().letter(full, Role::Input)});
  HyperFormula cex;
  cex.prefix = {{Quant::Exists, "pi1"}, {Quant::Exists, "pi2"}, {Quant::Exists, inst.prefix[2].second}};
  cex.premise = ltl_const(true);
  LtlP inputs = ltl_globally(ltl_and({v.input_is(0, a), v.input_is(1, b)}));
  if (std_a)
    cex.body = ltl_and({inputs, ltl_or({ltl_not(v.pintrs(0)), ltl_not(v.pintrs(1)), c.formula.body})});
  else
    cex.body = inputs;
  FormulaResult rc = check_exists(ts, cex);
  Truth inst_truth = rc.truth == Truth::Holds ? Truth::Fails : rc.truth == Truth::Fails ? Truth::Holds : Truth::Unknown;
  out.instances.push_back({"negation-" + side + " " + tag, inst.str(), inst_truth, rc.explored, since(t0)});

  t0 = std::chrono::steady_clock::now();
  HyperFormula g = guarantee(v, a, b);
  FormulaResult rg = check_exists(ts, g);
  out.instances.push_back({"guarantee " + tag, g.str(), rg.truth, rg.explored, since(t0)});
  out.explored = rc.explored + rg.explored;

  if (inst_truth == Truth::Holds && rg.truth == Truth::Holds) {
    out.status = Status::Doped;
    Witness w = *rg.witness;
    w.instance = c.name;
    w.note = "every " + c.formula.prefix[2].second + " fails the " + side + " characterization for this pair";
    out.witness = std::move(w);
    out.reason = "negation-" + side + " holds and its guarantee is met";
  } else if (inst_truth == Truth::Holds) {
    out.reason = "negation-" + side + " holds vacuously: no traces read " + tag;
    if (!rg.reason.empty()) out.reason = "guarantee: " + rg.reason;
  } else if (inst_truth == Truth::Fails) {
    out.reason = "negation-" + side + " fails for " + tag;
  } else {
    out.reason = "negation-" + side + ": " + rc.reason;
  }
  return out;
}

Verdict check(const TransitionSystem & ts, const Contract & c, Property p, const Options & o)
{
  if (o.mode == Mode::Oracle) return bounded_oracle(ts, c, p, o.depth);
  Vocabulary v(ts.signature(), c);
  if (o.mode == Mode::Exact) return check_exact(ts, v, p, o.budget);
  if (!v.past_forgetful()) throw UnsupportedError("dnew distances are only supported by the oracle mode");

  Verdict out;
  out.property = p;
  out.mode = Mode::Strengthen;
  auto t0 = std::chrono::steady_clock::now();
  HyperFormula f = strengthened(v, p);
  FormulaResult r = check_forall_forall(ts, f);
  out.instances.push_back({"strengthened", f.str(), r.truth, r.explored, since(t0)});
  out.explored = r.explored;
  if (r.truth == Truth::Holds) {
    out.status = Status::Clean;
    out.reason = "the strengthened formula holds";
    return out;
  }

  if (o.a && o.b && p != Property::Clean) {
    for (Side s : {Side::Left, Side::Right}) {
      Verdict n = check_negation_instance(ts, v, p, s, *o.a, *o.b);
      out.instances.insert(out.instances.end(), n.instances.begin(), n.instances.end());
      out.explored += n.explored;
      if (n.status == Status::Doped) {
        out.status = Status::Doped;
        out.witness = n.witness;
        out.reason = n.reason;
        return out;
      }
      out.reason += (out.reason.empty() ? "" : "; ") + n.reason;
    }
    out.status = Status::Unknown;
    out.witness = r.witness;
    if (out.witness) out.witness->instance = "strengthened";
    out.caveat = "the strengthened formula fails but neither negation instance settles the inputs given";
    return out;
  }

  // does the strengthened counterexample refute a characterization?
  const Witness & w = *r.witness;
  for (const Characterization & ch : characterizations(v, p)) {
    t0 = std::chrono::steady_clock::now();
    bool partner = has_partner(ts, v, p, ch.name, w.traces[0], w.traces[1]);
    out.instances.push_back({"confirm " + ch.name, ch.formula.str(), partner ? Truth::Unknown : Truth::Fails, 0,
                             since(t0)});
    if (!partner) {
      out.status = Status::Doped;
      out.witness = w;
      out.witness->instance = ch.name;
      out.witness->note = "no " + ch.formula.prefix[2].second + " exists for this pair";
      out.reason = ch.name + " fails on the strengthened counterexample";
      return out;
    }
  }
  out.status = Status::Unknown;
  out.witness = w;
  out.witness->instance = "strengthened";
  out.reason = "the strengthened formula fails";
  out.caveat = "the counterexample pair has partners for every characterization; negation instances "
               "(--a, --b) or the exact and oracle modes may settle it";
  return out;
}

// ---- replay

namespace {

Valuation pick(const Valuation & v, const std::vector<size_t> & sel)
{
  Valuation out;
  for (size_t k : sel) out.push_back(v[k]);
  return out;
}

bool replay_oracle(const TransitionSystem & ts, const Contract & c, Property p, const Witness & w)
{
  if (w.traces.size() != 2 || !w.bad_at || !w.far) return false;
  const Signature & sig = ts.signature();
  Vocabulary voc(sig, c);
  const size_t K = *w.bad_at;
  const int far = *w.far;
  const Lasso & tf = w.traces[size_t(far)];
  const Lasso & to = w.traces[size_t(1 - far)];
  std::vector<Valuation> v0 = decode_prefix(sig, w.traces[0], K + 1), v1 = decode_prefix(sig, w.traces[1], K + 1);
  auto param = [&](const Valuation & x) { return sig.letter(x, Role::Param); };
  auto input = [&](const Valuation & x) { return sig.letter(x, Role::Input); };
  if (!voc.param_ok(param(v0[0])) || !voc.param_ok(param(v1[0]))) return false;

  // the standard trace's input prefix must extend into StdIn
  react::Monitor mon(sig, c.stdin_spec);
  uint32_t q = mon.initial();
  for (size_t k = 0; k <= K; ++k) {
    q = mon.step(q, input(v0[k]));
    if (!mon.live(q)) return false;
  }
  // the far trace is a trace of the model
  if (!react::as_function(ts, tf.at(0), tf).contains(tf)) return false;

  const auto & in_sel = sig.of_role(Role::Input);
  const auto & out_sel = sig.of_role(Role::Output);
  const std::vector<Valuation> & vf = far == 0 ? v0 : v1;
  const std::vector<Valuation> & vo = far == 0 ? v1 : v0;
  (void)to;

  // other side: states reached with its parameter on its input prefix
  // (for clean, on the far trace's inputs and outputs)
  std::vector<uint32_t> cur;
  for (size_t k = 0; k <= K; ++k) {
    const Valuation & ref = p == Property::Clean ? vf[k] : vo[k];
    auto fits = [&](uint32_t t) {
      if (input(ts.values(t)) != input(ref)) return false;
      if (p == Property::Clean) return sig.letter(ts.values(t), Role::Output) == sig.letter(ref, Role::Output);
      return true;
    };
    std::vector<uint32_t> nx;
    if (k == 0) {
      for (uint32_t t : ts.initial())
        if (param(ts.values(t)) == param(vo[0]) && fits(t)) nx.push_back(t);
    } else {
      for (uint32_t s : cur)
        for (uint32_t t : ts.succ(s))
          if (fits(t)) nx.push_back(t);
    }
    std::sort(nx.begin(), nx.end());
    nx.erase(std::unique(nx.begin(), nx.end()), nx.end());
    cur = std::move(nx);
  }
  if (p == Property::Clean) {
    for (size_t k = 0; k <= K; ++k)
      if (input(v0[k]) != input(v1[k])) return false;
    return cur.empty();
  }

  const bool dnew = c.d_in.kind() == Distance::Kind::DNew;
  const Distance & dpt = dnew ? c.d_in.base() : c.d_in;
  const Value kin = dnew ? c.d_in.kappa() : c.kappa_in;
  bool eq = true, within = true;
  for (size_t k = 0; k <= K; ++k) {
    Value d = dpt(pick(v0[k], in_sel), pick(v1[k], in_sel));
    eq = eq && input(v0[k]) == input(v1[k]);
    within = within && d <= kin;
  }
  Value bound;
  if (p == Property::Robust) {
    if (!within) return false;
    bound = c.kappa_out;
  } else {
    BoundFn f = c.f.value_or(BoundFn::threshold(c.kappa_in, c.kappa_out));
    Value d = dnew ? Value::integer(eq ? 0 : within ? 1 : 2) : dpt(pick(v0[K], in_sel), pick(v1[K], in_sel));
    bound = f(d);
  }
  Valuation of = pick(vf[K], out_sel);
  for (uint32_t s : cur)
    if (c.d_out(of, pick(ts.values(s), out_sel)) <= bound) return false;
  return true;
}

}  // namespace

bool replay(const TransitionSystem & ts, const Contract & c, Property p, const Verdict & v)
{
  if (!v.witness) return false;
  const Witness & w = *v.witness;
  if (w.instance == "prefix-oracle") return replay_oracle(ts, c, p, w);
  if (w.traces.size() != 2) return false;
  Vocabulary voc(ts.signature(), c);
  std::vector<const Lasso *> tr{&w.traces[0], &w.traces[1]};
  HyperFormula f = strengthened(voc, p);
  if (!react::holds(*f.premise, ts.signature(), tr)) return false;
  if (w.instance == "strengthened") return !react::holds(*f.body, ts.signature(), tr);
  if (w.instance.rfind("characterization", 0) == 0)
    return !has_partner(ts, voc, p, w.instance, w.traces[0], w.traces[1]);
  return false;
}

}  // namespace dope::hyper
