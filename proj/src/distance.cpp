#include "dope/distance.h"

#include <algorithm>

#include "dope/errors.h"

namespace dope {

using nlohmann::json;

Distance Distance::discrete(Value value)
{
  if (value < Value()) throw DataError("negative discrete distance");
  Distance d;
  d.kind_ = Kind::Discrete;
  d.value_ = value;
  return d;
}

Distance Distance::custom(std::vector<Entry> table, Value fallback)
{
  if (fallback < Value()) throw DataError("negative fallback distance");
  Distance d;
  d.kind_ = Kind::Custom;
  d.value_ = fallback;
  for (auto & e : table) {
    if (e.a.size() != e.b.size())
      throw DataError("distance table entry with mismatched arity");
    if (e.d < Value()) throw DataError("negative distance in table");
    if (e.a == e.b && e.d != Value())
      throw DataError("distance table gives d(a,a) != 0 for "
                      + to_string(e.a));
    for (auto key : {std::make_pair(e.a, e.b), std::make_pair(e.b, e.a)}) {
      auto [it, fresh] = d.lookup_.emplace(key, e.d);
      if (!fresh && it->second != e.d)
        throw DataError("distance table is not symmetric at "
                        + to_string(e.a) + ", " + to_string(e.b));
    }
  }
  d.table_ = std::move(table);
  return d;
}

Distance Distance::past_forgetful(Distance base)
{
  if (base.is_trace_distance())
    throw DataError("past-forgetful lift needs a point distance");
  Distance d;
  d.kind_ = Kind::PastForgetful;
  d.base_ = std::make_shared<Distance>(std::move(base));
  return d;
}

Distance Distance::dnew(Distance base, Value kappa, TracePredicate stdin_pred)
{
  if (kappa.is_inf()) throw DataError("dnew needs a finite kappa");
  if (!base.is_trace_distance()) base = past_forgetful(std::move(base));
  Distance d;
  d.kind_ = Kind::DNew;
  d.value_ = kappa;
  d.base_ = std::make_shared<Distance>(std::move(base));
  d.stdin_ = std::move(stdin_pred);
  return d;
}

Value Distance::operator()(const Valuation & a, const Valuation & b) const
{
  switch (kind_) {
    case Kind::AbsDiff: {
      if (a.size() != b.size()) throw EvalError("distance arity mismatch");
      Value m;
      for (size_t k = 0; k < a.size(); ++k) m = std::max(m, (a[k] - b[k]).abs());
      return m;
    }
    case Kind::Discrete: return a == b ? Value() : value_;
    case Kind::Custom: {
      if (a == b) return Value();
      auto it = lookup_.find({a, b});
      return it == lookup_.end() ? value_ : it->second;
    }
    case Kind::PastForgetful: return (*base_)(a, b);
    case Kind::DNew:
      // one-element traces with no standardness information
      return a == b ? Value() : Value::integer(2);
  }
  return Value();
}

Value Distance::on_traces(const FiniteTrace & a, const FiniteTrace & b) const
{
  if (a.size() != b.size()) throw EvalError("trace distance of unequal lengths");
  switch (kind_) {
    case Kind::PastForgetful:
      if (a.empty()) return Value();
      return (*base_)(a.back(), b.back());
    case Kind::DNew: {
      if (a == b) return Value();
      bool standard = stdin_ && (stdin_(a) || stdin_(b));
      if (!standard) return Value::integer(2);
      for (size_t j = 1; j <= a.size(); ++j) {
        FiniteTrace pa(a.begin(), a.begin() + j), pb(b.begin(), b.begin() + j);
        if (base_->on_traces(pa, pb) > value_) return Value::integer(2);
      }
      return Value::integer(1);
    }
    default:
      throw UnsupportedError("point distance " + str() + " used on traces");
  }
}

std::string Distance::str() const
{
  switch (kind_) {
    case Kind::AbsDiff: return "absdiff";
    case Kind::Discrete: return "discrete(" + value_.str() + ")";
    case Kind::Custom: return "custom";
    case Kind::PastForgetful: return "last(" + base_->str() + ")";
    case Kind::DNew: return "dnew(" + base_->str() + ", " + value_.str() + ")";
  }
  return "";
}

bool Distance::operator==(const Distance & o) const
{
  if (kind_ != o.kind_ || value_ != o.value_) return false;
  if (kind_ == Kind::Custom) return lookup_ == o.lookup_;
  if (base_ || o.base_) return base_ && o.base_ && *base_ == *o.base_;
  return true;
}

namespace {

json valuation_json(const Valuation & v)
{
  if (v.size() == 1) return v[0];
  return json(v);
}

Valuation valuation_from(const json & j)
{
  if (j.is_array()) return j.get<Valuation>();
  return {j.get<Value>()};
}

}  // namespace

void to_json(json & j, const Distance & d)
{
  switch (d.kind()) {
    case Distance::Kind::AbsDiff: j = {{"kind", "absdiff"}}; break;
    case Distance::Kind::Discrete:
      j = {{"kind", "discrete"}, {"value", d.discrete_value()}};
      break;
    case Distance::Kind::Custom: {
      json t = json::array();
      for (auto & e : d.table())
        t.push_back({valuation_json(e.a), valuation_json(e.b), e.d});
      j = {{"kind", "custom"}, {"table", t}, {"default", d.discrete_value()}};
      break;
    }
    case Distance::Kind::PastForgetful:
      j = {{"kind", "past_forgetful"}, {"base", d.base()}};
      break;
    case Distance::Kind::DNew:
      throw UnsupportedError("dnew distances are built in code, not stored");
  }
}

void from_json(const json & j, Distance & d)
{
  if (!j.is_object() || !j.contains("kind"))
    throw DataError("distance must be an object with a 'kind'");
  std::string k = j.at("kind").get<std::string>();
  if (k == "absdiff") {
    d = Distance::abs_diff();
  } else if (k == "discrete") {
    d = Distance::discrete(j.at("value").get<Value>());
  } else if (k == "custom") {
    std::vector<Distance::Entry> t;
    for (auto & e : j.at("table")) {
      if (!e.is_array() || e.size() != 3)
        throw DataError("custom distance entries are [a, b, d]");
      t.push_back({valuation_from(e[0]), valuation_from(e[1]), e[2].get<Value>()});
    }
    d = Distance::custom(std::move(t), j.value("default", json(0)).get<Value>());
  } else if (k == "past_forgetful") {
    d = Distance::past_forgetful(j.at("base").get<Distance>());
  } else {
    throw DataError("unknown distance kind '" + k + "'");
  }
}

BoundFn BoundFn::threshold(Value kappa_in, Value kappa_out)
{
  BoundFn f;
  f.kind_ = Kind::Threshold;
  f.a_ = kappa_in;
  f.b_ = kappa_out;
  return f;
}

BoundFn BoundFn::affine(Value slope, Value offset)
{
  if (slope < Value() || slope.is_inf())
    throw DataError("affine bound needs a finite nonnegative slope");
  BoundFn f;
  f.kind_ = Kind::Affine;
  f.a_ = slope;
  f.b_ = offset;
  return f;
}

BoundFn BoundFn::custom(std::vector<std::pair<Value, Value>> steps)
{
  if (steps.empty()) throw DataError("empty bound table");
  std::sort(steps.begin(), steps.end());
  for (size_t i = 1; i < steps.size(); ++i)
    if (steps[i].first == steps[i - 1].first)
      throw DataError("bound table has duplicate key " + steps[i].first.str());
  BoundFn f;
  f.kind_ = Kind::Custom;
  f.a_ = Value();
  f.steps_ = std::move(steps);
  return f;
}

BoundFn BoundFn::constant(Value v)
{
  BoundFn f;
  f.kind_ = Kind::Constant;
  f.a_ = v;
  return f;
}

Value BoundFn::operator()(const Value & x) const
{
  switch (kind_) {
    case Kind::Threshold: return x <= a_ ? b_ : Value::infinity();
    case Kind::Affine:
      if (x.is_inf()) return x;
      return a_ * x + b_;
    case Kind::Custom: {
      auto it = std::upper_bound(
          steps_.begin(), steps_.end(), x,
          [](const Value & v, const auto & s) { return v < s.first; });
      if (it == steps_.begin()) return steps_.front().second;
      return (it - 1)->second;
    }
    case Kind::Constant: return a_;
  }
  return a_;
}

std::string BoundFn::str() const
{
  switch (kind_) {
    case Kind::Threshold: return "threshold(" + a_.str() + ", " + b_.str() + ")";
    case Kind::Affine: return a_.str() + "*x + " + b_.str();
    case Kind::Custom: return "table";
    case Kind::Constant: return a_.str();
  }
  return "";
}

void to_json(json & j, const BoundFn & f)
{
  switch (f.kind()) {
    case BoundFn::Kind::Threshold:
      j = {{"kind", "threshold"}, {"kappa_in", f.a()}, {"kappa_out", f.b()}};
      break;
    case BoundFn::Kind::Affine:
      j = {{"kind", "affine"}, {"slope", f.a()}, {"offset", f.b()}};
      break;
    case BoundFn::Kind::Custom: {
      json t = json::array();
      for (auto & [x, y] : f.steps()) t.push_back({x, y});
      j = {{"kind", "custom"}, {"table", t}};
      break;
    }
    case BoundFn::Kind::Constant: j = {{"kind", "constant"}, {"value", f.a()}}; break;
  }
}

void from_json(const json & j, BoundFn & f)
{
  if (!j.is_object() || !j.contains("kind"))
    throw DataError("bound function must be an object with a 'kind'");
  std::string k = j.at("kind").get<std::string>();
  if (k == "threshold") {
    f = BoundFn::threshold(j.at("kappa_in").get<Value>(),
                           j.at("kappa_out").get<Value>());
  } else if (k == "affine") {
    f = BoundFn::affine(j.at("slope").get<Value>(),
                        j.value("offset", json(0)).get<Value>());
  } else if (k == "custom") {
    std::vector<std::pair<Value, Value>> t;
    for (auto & e : j.at("table")) {
      if (!e.is_array() || e.size() != 2)
        throw DataError("bound table entries are [x, f(x)]");
      t.emplace_back(e[0].get<Value>(), e[1].get<Value>());
    }
    f = BoundFn::custom(std::move(t));
  } else if (k == "constant") {
    f = BoundFn::constant(j.at("value").get<Value>());
  } else {
    throw DataError("unknown bound function kind '" + k + "'");
  }
}

}  // namespace dope
