#include "dope/domain.h"

#include <algorithm>

#include "dope/errors.h"

namespace dope {

namespace {
constexpr size_t kMaxPoints = 1u << 22;
}

Domain Domain::interval(Value lo, bool lo_open, Value hi, bool hi_open,
                        Value step)
{
  if (lo.is_inf() || hi.is_inf() || step.is_inf())
    throw DataError("domain bounds must be finite");
  if (step <= Value()) throw DataError("domain step must be positive");
  if (hi < lo) throw DataError("domain with hi < lo");
  Domain d;
  d.kind_ = Kind::Interval;
  d.lo_ = lo;
  d.hi_ = hi;
  d.step_ = step;
  d.lo_open_ = lo_open;
  d.hi_open_ = hi_open;
  int64_t span = hi.mantissa() - lo.mantissa();
  int64_t n = span / step.mantissa();
  if (static_cast<size_t>(n) > kMaxPoints)
    throw DataError("domain too large (" + std::to_string(n) + " points)");
  for (int64_t k = lo_open ? 1 : 0; k <= n; ++k) {
    Value v = Value::raw(lo.mantissa() + k * step.mantissa());
    if (hi_open && v == hi) break;
    d.points_.push_back(v);
  }
  if (d.points_.empty()) throw DataError("empty domain " + d.str());
  return d;
}

Domain Domain::set(std::vector<Value> values)
{
  if (values.empty()) throw DataError("empty value set");
  for (auto & v : values)
    if (v.is_inf()) throw DataError("domain values must be finite");
  Domain d;
  d.kind_ = Kind::Set;
  std::sort(values.begin(), values.end());
  values.erase(std::unique(values.begin(), values.end()), values.end());
  d.points_ = std::move(values);
  d.lo_ = d.points_.front();
  d.hi_ = d.points_.back();
  return d;
}

const std::vector<Value> & Domain::points() const
{
  if (exact()) throw EvalError("exact domain has no finite grid");
  return points_;
}

bool Domain::contains(const Value & v) const
{
  if (exact()) return !v.is_inf();
  return std::binary_search(points_.begin(), points_.end(), v);
}

Value Domain::snap(const Value & v) const
{
  if (exact()) return v;
  auto it = std::lower_bound(points_.begin(), points_.end(), v);
  if (it == points_.end()) return points_.back();
  if (*it == v || it == points_.begin()) return *it;
  const Value & up = *it;
  const Value & down = *(it - 1);
  return (v - down) < (up - v) ? down : up;
}

std::vector<Value> Domain::points_in(const Value & lo, const Value & hi) const
{
  if (exact()) throw EvalError("nondeterministic range over an exact domain");
  // first index: largest point <= lo (or the first point)
  auto first = std::upper_bound(points_.begin(), points_.end(), lo);
  if (first != points_.begin()) --first;
  // last index: smallest point >= hi (or the last point)
  auto last = std::lower_bound(points_.begin(), points_.end(), hi);
  if (last == points_.end()) --last;
  if (last < first) return {};
  return std::vector<Value>(first, last + 1);
}

size_t Domain::index_of(const Value & v) const
{
  auto it = std::lower_bound(points_.begin(), points_.end(), v);
  if (it == points_.end() || *it != v)
    throw EvalError("value " + v.str() + " not on grid " + str());
  return static_cast<size_t>(it - points_.begin());
}

Value Domain::resolution() const
{
  if (exact() || points_.size() < 2) return Value();
  Value best = Value::infinity();
  for (size_t i = 1; i < points_.size(); ++i)
    best = std::min(best, points_[i] - points_[i - 1]);
  return best;
}

std::string Domain::str() const
{
  switch (kind_) {
    case Kind::Exact: return "";
    case Kind::Interval:
      return std::string(lo_open_ ? "(" : "[") + lo_.str() + ", " + hi_.str()
             + (hi_open_ ? ")" : "]") + " step " + step_.str();
    case Kind::Set: {
      std::string s = "{";
      for (size_t i = 0; i < points_.size(); ++i)
        s += (i ? ", " : "") + points_[i].str();
      return s + "}";
    }
  }
  return "";
}

bool Domain::operator==(const Domain & o) const
{
  if (kind_ != o.kind_) return false;
  if (kind_ == Kind::Interval)
    return lo_ == o.lo_ && hi_ == o.hi_ && step_ == o.step_
           && lo_open_ == o.lo_open_ && hi_open_ == o.hi_open_;
  return points_ == o.points_;
}

std::vector<Valuation> product(const std::vector<const Domain *> & doms)
{
  std::vector<Valuation> out;
  size_t total = 1;
  for (auto * d : doms) {
    total *= d->points().size();
    if (total > kMaxPoints) throw DataError("domain product too large");
  }
  out.reserve(total);
  Valuation cur(doms.size());
  std::vector<size_t> idx(doms.size(), 0);
  for (size_t n = 0; n < total; ++n) {
    for (size_t k = 0; k < doms.size(); ++k) cur[k] = doms[k]->points()[idx[k]];
    out.push_back(cur);
    for (size_t k = doms.size(); k-- > 0;) {
      if (++idx[k] < doms[k]->points().size()) break;
      idx[k] = 0;
    }
  }
  return out;
}

}  // namespace dope
