#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "dope/contract.h"
#include "dope/reactive.h"
#include "dope/verdict.h"

namespace dope::hyper {

using react::Lasso;
using react::LtlP;
using react::Role;
using react::Signature;
using react::TransitionSystem;

enum class Property { Clean, Robust, FClean };
const char * property_name(Property p);
Property parse_property(const std::string & s);  // DataError on anything else

enum class Truth { Holds, Fails, Unknown };
const char * truth_name(Truth t);

enum class Quant { Forall, Exists };

// Quantifier prefix, premise and body; the formula reads
// Q1 x1 ... Qn xn. premise -> body. Trace variable k is prefix[k].
struct HyperFormula
{
  std::vector<std::pair<Quant, std::string>> prefix;
  LtlP premise;
  LtlP body;

  std::vector<std::string> names() const;
  std::string str() const;
};

// Atoms of a contract over one model's signals.
class Vocabulary
{
 public:
  Vocabulary(const Signature & sig, const Contract & c);

  const Signature & sig() const { return sig_; }
  const Contract & contract() const { return c_; }
  bool param_ok(uint32_t param_letter) const { return pintrs_[param_letter]; }
  // the distances' point forms; DNew has none and raises UnsupportedError
  bool past_forgetful() const;

  LtlP pintrs(int var) const;
  LtlP stdin_(int var) const;
  LtlP same(Role r, int a, int b) const;   // p_a = p_b, i_a = i_b, o_a = o_b
  LtlP in_within(int a, int b) const;      // dIn(i_a, i_b) <= kappa_in
  LtlP out_within(int a, int b) const;     // dOut(o_a, o_b) <= kappa_out
  LtlP out_within_f(int a, int b) const;   // dOut(o_a, o_b) <= f(dIn(i_a, i_b))
  LtlP input_is(int var, const Valuation & inputs) const;

  // the safety condition relating the reference trace a and the compared
  // trace b: (dOut <= kappa_out) W (dIn > kappa_in), G(dOut <= f(dIn)), or
  // G(o_a = o_b) for Clean
  LtlP condition(Property p, int a, int b) const;

  // input letter of a value list given in input-signal order
  Valuation inputs_of(const std::vector<Value> & v) const;

 private:
  Signature sig_;
  Contract c_;
  std::vector<bool> pintrs_;
  std::vector<size_t> in_sel_, out_sel_, par_sel_;
  std::shared_ptr<const Distance> d_in_, d_out_;
  std::shared_ptr<const BoundFn> f_;
};

// Replaces the comparison atoms (equalities, distance bounds, membership)
// by disjunctions of full minterms over the propositions' bits.
LtlP expand_bits(const Signature & sig, const LtlP & f);

// ---- formulas

// The characterizing forall-forall-exists formulas: one for Clean, two for
// Robust and FClean (the compared trace exists on the right, then on the
// left). The exists variable copies parameters from `param_from` and inputs
// from `input_from`; `condition` is the safety part of the body.
struct Characterization
{
  HyperFormula formula;
  std::string name;
  int exists_var;
  int param_from;
  int input_from;
  LtlP condition;
};
std::vector<Characterization> characterizations(const Vocabulary & v, Property p);

// exists variable replaced by the second universal one
HyperFormula strengthened(const Vocabulary & v, Property p);

enum class Side { Left, Right };
// forall^3 instance with the first trace's input fixed to a and the
// second's to b; Left negates the first characterization, Right the second
HyperFormula negation_instance(const Vocabulary & v, Property p, Side s, const Valuation & a,
                               const Valuation & b);
// exists pi1 exists pi2. G(i_pi1 = a && i_pi2 = b)
HyperFormula guarantee(const Vocabulary & v, const Valuation & a, const Valuation & b);

// ---- results

struct Witness
{
  std::vector<std::string> vars;
  std::vector<Lasso> traces;
  // position where the bad prefix ends, when there is one
  std::optional<size_t> bad_at;
  // what the traces refute: "strengthened", a characterization name,
  // or "prefix-oracle"
  std::string instance;
  // oracle: index of the trace whose output has no close match
  std::optional<int> far;
  std::string note;
};

struct FormulaResult
{
  Truth truth = Truth::Unknown;
  std::optional<Witness> witness;  // counterexample, or the satisfying tuple for exists
  size_t explored = 0;
  std::string reason;
};

// forall-forall formula: the premise a conjunction of one-variable safety
// formulas, the body in the safety fragment. Exact: Holds iff no reachable
// bad prefix in the two-fold product.
FormulaResult check_forall_forall(const TransitionSystem & ts, const HyperFormula & f);

// exists^n formula (n <= 3) with premise true and a safety body: Holds iff
// the product restricted to non-violating states has a reachable cycle.
FormulaResult check_exists(const TransitionSystem & ts, const HyperFormula & f,
                           size_t budget = 4000000);

// Is there a trace that copies the parameters of `param_src` and the inputs
// of `input_src` and keeps `condition` with the fixed traces? condition is
// over variables 0 .. fixed.size(); the candidate is variable `var`.
bool exists_partner(const TransitionSystem & ts, const LtlP & condition,
                    const std::vector<const Lasso *> & fixed, int var, const Lasso & param_src,
                    const Lasso & input_src);

// ---- property verdicts

enum class Mode { Strengthen, Exact, Oracle };
const char * mode_name(Mode m);
Mode parse_mode(const std::string & s);

struct Instance
{
  std::string name;
  std::string formula;
  Truth truth = Truth::Unknown;
  size_t explored = 0;
  double seconds = 0;
};

struct Verdict
{
  Status status = Status::Unknown;
  Property property = Property::Robust;
  Mode mode = Mode::Strengthen;
  std::vector<Instance> instances;
  std::optional<Witness> witness;
  std::string reason;
  std::string caveat;
  size_t explored = 0;
  size_t depth = 0;  // oracle: prefix length bound used
  bool complete = false;  // oracle: every configuration was explored
};

struct Options
{
  Mode mode = Mode::Strengthen;
  std::optional<Valuation> a, b;  // input letters for negation instances
  size_t depth = 0;               // oracle depth; 0 picks the default
  size_t budget = 2000000;        // exact mode: generated configurations
};

// negation instance together with its guarantee
Verdict check_negation_instance(const TransitionSystem & ts, const Vocabulary & v, Property p,
                                Side s, const Valuation & a, const Valuation & b);

// all characterizations decided by subset construction over the triple
// product; Unknown once more than `budget` successor configurations
// would be generated
Verdict check_exact(const TransitionSystem & ts, const Vocabulary & v, Property p,
                    size_t budget = 2000000);

// The prefix definitions read directly: breadth-first over pairs of input
// prefixes with the sets of states each one reaches. Needs a receptive
// model. depth 0 picks min(2 * |S|^2 * |monitor|, 10^4).
Verdict bounded_oracle(const TransitionSystem & ts, const Contract & c, Property p,
                       size_t depth = 0);

Verdict check(const TransitionSystem & ts, const Contract & c, Property p, const Options & o);

// ---- witness replay

// true if the witness shows the property violated: for formula witnesses
// the condition fails on the traces, for oracle witnesses no trace of the
// other side matches the reported one on the bad prefix.
bool replay(const TransitionSystem & ts, const Contract & c, Property p, const Verdict & v);

}  // namespace dope::hyper
