#pragma once

#include <optional>
#include <string>
#include <vector>

#include "dope/value.h"

namespace dope {

// Finite discretized domain: an anchored interval grid or an explicit set.
// A default-constructed Domain is "exact": no grid, no snapping, not
// enumerable.
class Domain
{
 public:
  Domain() = default;

  // points lo + k*step inside the interval; lo excluded when lo_open
  static Domain interval(Value lo, bool lo_open, Value hi, bool hi_open,
                         Value step);
  static Domain set(std::vector<Value> values);

  bool exact() const { return kind_ == Kind::Exact; }
  bool is_set() const { return kind_ == Kind::Set; }
  const std::vector<Value> & points() const;
  size_t size() const { return points_.size(); }
  bool contains(const Value & v) const;
  // nearest grid point (ties go up); identity on exact domains
  Value snap(const Value & v) const;
  // grid points of [lo, hi] with both ends snapped outward
  std::vector<Value> points_in(const Value & lo, const Value & hi) const;
  // index of v in points(); v must be on the grid
  size_t index_of(const Value & v) const;
  // smallest positive gap between neighbouring points, 0 if fewer than 2
  Value resolution() const;

  // declaration syntax: "(0, 2] step 0.1" or "{0, 1, 2}"
  std::string str() const;

  bool operator==(const Domain & o) const;

  Value lo() const { return lo_; }
  Value hi() const { return hi_; }
  bool lo_open() const { return lo_open_; }
  bool hi_open() const { return hi_open_; }
  Value step() const { return step_; }

 private:
  enum class Kind { Exact, Interval, Set };
  Kind kind_ = Kind::Exact;
  Value lo_, hi_, step_;
  bool lo_open_ = false, hi_open_ = false;
  std::vector<Value> points_;
};

// Cartesian product of domains in lexicographic order (first varies slowest).
std::vector<Valuation> product(const std::vector<const Domain *> & doms);

}  // namespace dope
