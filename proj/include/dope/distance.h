#pragma once

#include <functional>
#include <map>
#include <memory>
#include <utility>
#include <vector>

#include "dope/value.h"

namespace dope {

using FiniteTrace = std::vector<Valuation>;
using TracePredicate = std::function<bool(const FiniteTrace &)>;

class Distance
{
 public:
  enum class Kind { AbsDiff, Discrete, Custom, PastForgetful, DNew };

  struct Entry
  {
    Valuation a, b;
    Value d;
  };

  Distance() = default;  // AbsDiff

  static Distance abs_diff() { return Distance(); }
  // 0 on equal arguments, `value` otherwise
  static Distance discrete(Value value);
  // symmetric lookup; pairs not listed get 0 if equal, `fallback` otherwise
  static Distance custom(std::vector<Entry> table, Value fallback);
  // trace distance that only looks at the last elements
  static Distance past_forgetful(Distance base);
  // the three-valued input distance: 0 equal prefixes; 1 if one trace is
  // standard and every prefix is within kappa under base; 2 otherwise
  static Distance dnew(Distance base, Value kappa, TracePredicate stdin_pred);

  Kind kind() const { return kind_; }
  bool is_trace_distance() const
  {
    return kind_ == Kind::PastForgetful || kind_ == Kind::DNew;
  }
  const Distance & base() const { return *base_; }
  Value kappa() const { return value_; }
  Value discrete_value() const { return value_; }
  const std::vector<Entry> & table() const { return table_; }

  // point distance; trace kinds apply their base to the two points, which
  // is their value on one-element traces
  Value operator()(const Valuation & a, const Valuation & b) const;
  // distance of two finite traces of equal length
  Value on_traces(const FiniteTrace & a, const FiniteTrace & b) const;

  std::string str() const;
  bool operator==(const Distance & o) const;

 private:
  Kind kind_ = Kind::AbsDiff;
  Value value_;
  std::vector<Entry> table_;
  std::map<std::pair<Valuation, Valuation>, Value> lookup_;
  std::shared_ptr<const Distance> base_;
  TracePredicate stdin_;
};

void to_json(nlohmann::json & j, const Distance & d);
void from_json(const nlohmann::json & j, Distance & d);

class BoundFn
{
 public:
  enum class Kind { Threshold, Affine, Custom, Constant };

  BoundFn() = default;  // constant inf

  static BoundFn threshold(Value kappa_in, Value kappa_out);
  static BoundFn affine(Value slope, Value offset);
  // step function: value of the greatest key <= x (first value below)
  static BoundFn custom(std::vector<std::pair<Value, Value>> steps);
  static BoundFn constant(Value v);

  Kind kind() const { return kind_; }
  Value operator()(const Value & x) const;
  std::string str() const;
  bool operator==(const BoundFn & o) const = default;

  Value a() const { return a_; }
  Value b() const { return b_; }
  const std::vector<std::pair<Value, Value>> & steps() const { return steps_; }

 private:
  Kind kind_ = Kind::Constant;
  Value a_ = Value::infinity(), b_;
  std::vector<std::pair<Value, Value>> steps_;
};

void to_json(nlohmann::json & j, const BoundFn & f);
void from_json(const nlohmann::json & j, BoundFn & f);

}  // namespace dope
