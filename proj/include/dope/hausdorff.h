#pragma once

#include <algorithm>
#include <vector>

#include "dope/distance.h"

namespace dope {

// H(d)(A, B) = max(sup_a inf_b d, sup_b inf_a d).
// Both empty -> 0, exactly one empty -> inf.
template <class T, class D>
Value hausdorff_with(const D & d, const std::vector<T> & A,
                     const std::vector<T> & B)
{
  if (A.empty() && B.empty()) return Value();
  if (A.empty() || B.empty()) return Value::infinity();
  Value h;
  auto directed = [&](const std::vector<T> & X, const std::vector<T> & Y) {
    for (const T & x : X) {
      Value best = Value::infinity();
      for (const T & y : Y) {
        best = std::min(best, d(x, y));
        if (best <= h) break;  // cannot raise the max
      }
      h = std::max(h, best);
    }
  };
  directed(A, B);
  directed(B, A);
  return h;
}

template <class T, class D>
bool hausdorff_two_clause_with(const D & d, const std::vector<T> & A,
                               const std::vector<T> & B, const Value & bound)
{
  auto covered = [&](const std::vector<T> & X, const std::vector<T> & Y) {
    for (const T & x : X) {
      bool found = false;
      for (const T & y : Y)
        if (d(x, y) <= bound) {
          found = true;
          break;
        }
      if (!found) return false;
    }
    return true;
  };
  return covered(A, B) && covered(B, A);
}

inline Value hausdorff(const Distance & d, const std::vector<Valuation> & A,
                       const std::vector<Valuation> & B)
{
  return hausdorff_with(d, A, B);
}

inline bool hausdorff_two_clause(const Distance & d,
                                 const std::vector<Valuation> & A,
                                 const std::vector<Valuation> & B,
                                 const Value & bound)
{
  return hausdorff_two_clause_with(d, A, B, bound);
}

}  // namespace dope
