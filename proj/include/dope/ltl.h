#pragma once

#include <cstdint>
#include <memory>
#include <mutex>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "dope/distance.h"
#include "dope/domain.h"
#include "dope/lang/ast.h"

namespace dope::react {

// An atomic test on one letter per trace variable. Letters are full
// valuations of a model's signals, in signal order.
struct Atom
{
  enum class Kind {
    State,     // pred on the letter of trace a
    Equal,     // the signals in sel agree on traces a and b
    InDist,    // d_in(sel of a, sel of b) <= bound
    OutDist,   // d_out(sel of a, sel of b) <= bound
    OutDistF,  // d_out(sel) <= f(d_in(sel2))
    Member,    // the signals in sel of trace a form one of `allowed`
    Bit,       // bit `bit` of the grid index of signal sel[0] on trace a
  };
  Kind kind = Kind::State;
  int a = 0, b = 0;
  lang::ExprP pred;          // State, slots are signal indices
  std::vector<size_t> sel;   // compared signals
  std::vector<size_t> sel2;  // OutDistF: input signals
  Value bound;
  std::shared_ptr<const Distance> d_in, d_out;
  std::shared_ptr<const BoundFn> f;
  std::shared_ptr<const std::set<Valuation>> allowed;
  std::shared_ptr<const Domain> dom;
  int bit = 0;
  std::string text;  // printed form with placeholders $a and $b

  bool eval(const std::vector<const Valuation *> & letters) const;
};

struct Ltl;
using LtlP = std::shared_ptr<const Ltl>;
using AtomP = std::shared_ptr<const Atom>;

struct Ltl
{
  enum class Op {
    True, False, Atom, Not, And, Or, Implies,
    Next, Globally, Finally, Until, WeakUntil,
  };
  Op op = Op::True;
  std::vector<LtlP> args;
  AtomP atom;
};

LtlP ltl_const(bool b);
LtlP ltl_atom(AtomP a);
LtlP ltl_not(LtlP a);
LtlP ltl_and(std::vector<LtlP> xs);
LtlP ltl_or(std::vector<LtlP> xs);
LtlP ltl_implies(LtlP a, LtlP b);
LtlP ltl_next(LtlP a);
LtlP ltl_globally(LtlP a);
LtlP ltl_finally(LtlP a);
LtlP ltl_until(LtlP a, LtlP b);
LtlP ltl_weak_until(LtlP a, LtlP b);

// names[k] is printed for trace variable k
std::string to_string(const Ltl & f, const std::vector<std::string> & names);

// Converts a temporal formula parsed with lang::parse_expr(temporal) into
// an Ltl over trace variable `var`; maximal temporal-free subformulas
// become State atoms.
LtlP from_expr(const lang::ExprP & e, int var);

// Negation normal form of a formula in the safety fragment (state atoms,
// and, or, X, G, W; implication with a temporal-free antecedent).
// Anything else raises UnsupportedError naming the operator.
LtlP safety_nnf(const LtlP & f);

// Deterministic automaton by formula progression. State 0 is false (a bad
// prefix was read), state 1 is true. Transitions are memoized on the
// truth vector of the formula's atoms and may be queried concurrently.
class SafetyAutomaton
{
 public:
  static constexpr uint32_t kFalse = 0;
  static constexpr uint32_t kTrue = 1;

  explicit SafetyAutomaton(const LtlP & body);

  uint32_t initial() const { return initial_; }
  const std::vector<AtomP> & atoms() const { return atoms_; }
  uint64_t mask(const std::vector<const Valuation *> & letters) const;
  uint32_t step(uint32_t q, uint64_t mask) const;
  uint32_t step(uint32_t q, const std::vector<const Valuation *> & letters) const
  {
    return step(q, mask(letters));
  }
  size_t size() const;
  LtlP state(uint32_t q) const;

 private:
  uint32_t intern(const LtlP & f) const;

  std::vector<AtomP> atoms_;
  std::unordered_map<const Atom *, size_t> atom_index_;
  uint32_t initial_ = kTrue;
  mutable std::mutex mu_;
  mutable std::vector<LtlP> states_;
  mutable std::unordered_map<std::string, uint32_t> ids_;
  mutable std::unordered_map<uint64_t, uint32_t> delta_;  // (q << 32 | mask)
};

// progression of f over one letter tuple; exposed for tests
LtlP progress(const LtlP & f, const std::vector<const Valuation *> & letters);

}  // namespace dope::react
