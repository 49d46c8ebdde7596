#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dope/contract.h"
#include "dope/domain.h"
#include "dope/lang/ast.h"
#include "dope/ltl.h"

namespace dope::react {

using lang::Role;

// One bit per atomic proposition.
using Label = std::vector<bool>;

// A numeric signal on a grid. Its value is carried by `width` atomic
// propositions "name.0" .. "name.<width-1>" holding the binary grid index
// of the value, least significant bit first.
struct Signal
{
  std::string name;
  Role role = Role::Input;
  Domain domain;
  unsigned width = 1;
  unsigned first_bit = 0;
};

class Signature
{
 public:
  Signature() = default;

  // role must be Param, Input or Output; the domain must be enumerable
  size_t add(const std::string & name, Role role, const Domain & domain);

  const std::vector<Signal> & signals() const { return signals_; }
  const Signal & signal(size_t k) const { return signals_[k]; }
  int find(const std::string & name) const;
  const std::vector<size_t> & of_role(Role r) const;

  size_t ap_count() const { return ap_names_.size(); }
  const std::string & ap_name(size_t k) const { return ap_names_[k]; }
  int find_ap(const std::string & name) const;
  // mask of the propositions of one role
  Label ap_mask(Role r) const;

  // values in signal order
  Label encode(const Valuation & v) const;
  // throws DataError on a code outside a signal's grid
  Valuation decode(const Label & l) const;

  // letter index of the role's values: lexicographic over the role's
  // domains in signal order, first signal slowest
  size_t letter_count(Role r) const;
  uint32_t letter(const Valuation & v, Role r) const;
  // full-length valuation with the role's signals set from the letter and
  // every other signal at its first grid point
  Valuation letter_values(Role r, uint32_t letter) const;

  bool operator==(const Signature & o) const;

 private:
  std::vector<Signal> signals_;
  std::vector<std::string> ap_names_;
  std::vector<size_t> roles_[3];
};

// Finite-state reactive model: states labelled with a valuation of the
// signals, a transition relation and initial states. A trace is the
// sequence of labels along an infinite path from an initial state.
class TransitionSystem
{
 public:
  TransitionSystem() = default;
  explicit TransitionSystem(Signature sig) : sig_(std::move(sig)) {}

  uint32_t add_state(Valuation values);
  void add_initial(uint32_t s);
  void add_edge(uint32_t from, uint32_t to);
  // Sorts and dedupes the relation, builds letter indexes and checks the
  // invariants: some initial state, every state has a successor, parameter
  // values never change along an edge. Throws DataError.
  void finalize();

  const Signature & signature() const { return sig_; }
  size_t size() const { return values_.size(); }
  size_t edge_count() const;
  const Valuation & values(uint32_t s) const { return values_[s]; }
  Label label(uint32_t s) const { return sig_.encode(values_[s]); }
  const std::vector<uint32_t> & initial() const { return init_; }
  const std::vector<uint32_t> & succ(uint32_t s) const { return succ_[s]; }
  const std::vector<uint32_t> & pred(uint32_t s) const { return pred_[s]; }
  uint32_t letter(uint32_t s, Role r) const;

  std::vector<uint32_t> reachable() const;
  // every parameter with an initial state reads every input letter first,
  // and every reachable state accepts every input letter next
  bool receptive() const;
  // at most one initial state per (parameter, input) and one successor
  // per (state, input)
  bool deterministic() const;

 private:
  Signature sig_;
  std::vector<Valuation> values_;
  std::vector<uint32_t> init_;
  std::vector<std::vector<uint32_t>> succ_, pred_;
  std::vector<uint32_t> letters_[3];
  bool final_ = false;
};

// Ultimately periodic trace stem . loop^omega; loop is never empty.
struct Lasso
{
  std::vector<Label> stem, loop;

  size_t span() const { return stem.size() + loop.size(); }
  const Label & at(size_t k) const;
  // t[k..]
  Lasso suffix(size_t k) const;
  // t[..k], k + 1 letters
  std::vector<Label> prefix(size_t k) const;
  bool operator==(const Lasso &) const = default;
};

// shortest stem, primitive loop; equal words normalize equally
Lasso normalize(const Lasso & t);
bool same_word(const Lasso & a, const Lasso & b);

// pointwise intersection with the propositions set in `mask`
Lasso project(const Lasso & t, const Label & mask);
Label project(const Label & l, const Label & mask);
Label intersect(const Label & a, const Label & b);

// path of states stem . loop^omega
struct Run
{
  std::vector<uint32_t> stem, loop;
};
Lasso to_lasso(const TransitionSystem & ts, const Run & r);
// values at position k of a run
const Valuation & run_at(const TransitionSystem & ts, const Run & r, size_t k);

// The set of output traces the model produces for one parameter letter and
// one input trace, i.e. the outputs of all runs that agree with them.
class OutputTraces
{
 public:
  bool empty() const { return live_init_.empty(); }
  bool contains(const Lasso & out) const;
  // distinct output lassos from simple run lassos, at most `limit`
  std::vector<Lasso> enumerate(size_t limit = 1000) const;
  size_t nodes() const { return live_count_; }

 private:
  friend OutputTraces as_function(const TransitionSystem &, const Label &, const Lasso &);
  struct Node
  {
    uint32_t s;
    uint32_t pos;
  };
  const TransitionSystem * ts_ = nullptr;
  size_t stem_ = 0, span_ = 0;
  Label out_mask_;
  std::vector<Node> nodes_;
  std::vector<std::vector<uint32_t>> succ_;
  std::vector<uint32_t> live_init_;
  size_t live_count_ = 0;
};

// params: a label whose parameter bits are used; inputs: a lasso whose
// input bits are used. Other bits are ignored.
OutputTraces as_function(const TransitionSystem & ts, const Label & params, const Lasso & inputs);

// StdIn as a deterministic safety monitor over input letters.
class Monitor
{
 public:
  // text: temporal formula over input signal names
  Monitor(const Signature & sig, const std::string & text);
  Monitor(const Signature & sig, LtlP formula);

  uint32_t initial() const { return initial_; }
  uint32_t step(uint32_t q, uint32_t input_letter) const
  {
    return delta_[q * letters_ + input_letter];
  }
  // some infinite continuation is accepted
  bool live(uint32_t q) const { return live_[q]; }
  size_t states() const { return live_.size(); }
  size_t live_states() const;
  size_t letters() const { return letters_; }
  const LtlP & formula() const { return formula_; }
  std::string describe(uint32_t q) const;
  // acceptance of an input word given as a lasso of input letters
  bool accepts(const std::vector<uint32_t> & stem, const std::vector<uint32_t> & loop) const;

 private:
  void build(const Signature & sig);

  LtlP formula_;
  std::vector<LtlP> texts_;
  size_t letters_ = 0;
  uint32_t initial_ = 0;
  std::vector<uint32_t> delta_;
  std::vector<bool> live_;
};

Monitor stdin_monitor(const Signature & sig, const std::string & text);

// temporal formula over the signals of one role, for trace variable var
LtlP parse_role_formula(const Signature & sig, Role role, const std::string & text, int var = 0);

// exact evaluation at position pos of a formula over a tuple of lassos
bool holds(const Ltl & f, const Signature & sig, const std::vector<const Lasso *> & traces,
           size_t pos = 0);
bool eval_weak_until(const LtlP & phi, const LtlP & psi, const Signature & sig,
                     const std::vector<const Lasso *> & traces, size_t k = 0);

// JSON model format, see docs/model-format.md
nlohmann::json model_to_json(const TransitionSystem & ts);
TransitionSystem model_from_json(const nlohmann::json & j);
TransitionSystem load_model(const std::string & path);

}  // namespace dope::react
