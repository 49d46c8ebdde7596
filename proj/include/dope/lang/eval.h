#pragma once

#include <set>
#include <string>
#include <vector>

#include "dope/lang/ast.h"

namespace dope::lang {

inline constexpr size_t kDefaultBudget = 100000;

// S(p)(i): every output valuation reachable by some resolution of the
// nondeterministic assignments, plus the divergence marker.
struct Outcome
{
  std::set<Valuation> outputs;  // output slots in declaration order
  bool diverged = false;        // some resolution ran out of budget
  std::vector<std::string> warnings;

  bool operator==(const Outcome & o) const
  {
    return outputs == o.outputs && diverged == o.diverged;
  }
};

// params and inputs are given in declaration order of their roles.
// budget counts executed statements per resolution path.
Outcome eval(const Program & p, const Valuation & params,
             const Valuation & inputs, size_t budget = kDefaultBudget);

// initial full state for the given parameter and input values
Valuation initial_state(const Program & p, const Valuation & params,
                        const Valuation & inputs);

}  // namespace dope::lang
