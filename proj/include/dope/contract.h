#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dope/distance.h"

namespace dope {

// Parameters of interest given either as a predicate over parameter
// variables or as an explicit list of valuations keyed by variable name.
struct ParamSet
{
  std::string predicate = "true";
  std::optional<std::vector<std::map<std::string, Value>>> valuations;
  bool operator==(const ParamSet &) const = default;
};

// Predicates are kept as source text; the sequential checkers read them as
// boolean expressions over program variables, the reactive ones as temporal
// formulas over signal names.
struct Contract
{
  ParamSet pintrs;
  std::string stdin_spec = "true";
  std::optional<std::string> comm;
  Distance d_in;
  Distance d_out;
  Value kappa_in;
  Value kappa_out;
  std::optional<BoundFn> f;
  int scale = Value::kDigits;  // decimal digits constants must fit in

  bool operator==(const Contract &) const = default;
};

nlohmann::json contract_to_json(const Contract & c);
Contract contract_from_json(const nlohmann::json & j);
Contract load_contract(const std::string & path);
std::string dump_contract(const Contract & c);

}  // namespace dope
