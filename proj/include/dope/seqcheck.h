#pragma once

#include <optional>
#include <string>
#include <vector>

#include "dope/contract.h"
#include "dope/lang/eval.h"
#include "dope/verdict.h"

namespace dope {

enum class SeqProperty { Clean, Robust, FClean, General };

const char * property_name(SeqProperty p);
SeqProperty parse_seq_property(const std::string & s);

struct SeqWitness
{
  Valuation p, p2, i, i2;
  std::vector<Valuation> out1, out2;
  bool div1 = false, div2 = false;
  Value measured;  // Hausdorff distance (0 for set inequality)
  Value bound;     // the bound it had to respect
  int item = 0;    // failed item of the general check (1-3), else 0
};

struct SeqVerdict
{
  Status status = Status::Clean;
  std::string reason;
  std::optional<SeqWitness> witness;
  size_t tuples = 0;  // (p, p', i, i') combinations examined
  size_t evals = 0;   // program runs
  // general check: largest output distance at grid resolution outside
  // StdIn and Comm, and the input resolution it was sampled at
  std::optional<Value> continuity;
  std::optional<Value> resolution;
  std::vector<std::string> warnings;
};

struct SeqOptions
{
  size_t budget = lang::kDefaultBudget;
  // item 3 of the general check is reported as Doped when the sampled
  // output jump reaches this value
  std::optional<Value> continuity_eps;
};

// Enumerates PIntrs x In once and answers every definition from the cache
// of S(p)(i) outcomes.
class SeqChecker
{
 public:
  SeqChecker(const lang::Program & prog, const Contract & c, SeqOptions opts = {});

  SeqVerdict check(SeqProperty prop);
  SeqVerdict clean();
  SeqVerdict robust();
  SeqVerdict f_clean();
  SeqVerdict general();

  const std::vector<Valuation> & params() const { return params_; }
  const std::vector<Valuation> & inputs() const { return inputs_; }
  bool is_stdin(size_t i) const { return stdin_[i]; }
  bool is_comm(size_t i) const { return comm_[i]; }
  const lang::Outcome & outcome(size_t p, size_t i);

  std::vector<std::string> param_names() const;
  std::vector<std::string> input_names() const;
  std::vector<std::string> output_names() const;

 private:
  void prepare(const std::vector<size_t> & input_idx);
  SeqVerdict bounded(bool robust_mode, bool comm_only);
  std::vector<Valuation> outs(const lang::Outcome & o) const;

  const lang::Program & prog_;
  Contract c_;
  SeqOptions opts_;
  std::vector<Valuation> params_, inputs_;
  std::vector<bool> stdin_, comm_;
  std::vector<std::optional<lang::Outcome>> cache_;
  size_t evals_ = 0;
};

SeqVerdict check_clean(const lang::Program & p, const Contract & c, const SeqOptions & o = {});
SeqVerdict check_robustly_clean(const lang::Program & p, const Contract & c,
                                const SeqOptions & o = {});
SeqVerdict check_f_clean(const lang::Program & p, const Contract & c, const SeqOptions & o = {});
SeqVerdict check_general_clean(const lang::Program & p, const Contract & c,
                               const SeqOptions & o = {});

// Re-runs the witness and tests whether it violates the property again.
bool replay_witness(const lang::Program & p, const Contract & c, SeqProperty prop,
                    const SeqWitness & w, size_t budget = lang::kDefaultBudget);

// Valuations of the parameter variables admitted by the contract, in
// lexicographic order.
std::vector<Valuation> parameter_space(const lang::Program & p, const Contract & c);

// compiles a predicate over the variables of the given role; the
// returned expression's slots index a valuation of that role
lang::ExprP role_predicate(const lang::Program & p, lang::Role role,
                           const std::string & text);

}  // namespace dope
