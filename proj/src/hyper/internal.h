#pragma once

// Shared plumbing of the hyperproperty checkers.

#include <array>
#include <cstdint>
#include <functional>
#include <vector>

#include "dope/hypercheck.h"

namespace dope::hyper::detail {

using react::Ltl;
using react::Run;
using react::SafetyAutomaton;

// Live part of a model restricted by a one-variable safety constraint:
// nodes are (model state, constraint state) pairs from which some infinite
// path keeps the constraint.
struct CopyGraph
{
  std::vector<uint32_t> state;
  std::vector<uint32_t> cstate;
  std::vector<std::vector<uint32_t>> succ;
  std::vector<uint32_t> init;

  size_t size() const { return state.size(); }
};

// constraint over trace variable `var` of an `arity`-variable formula
CopyGraph build_copy(const TransitionSystem & ts, const LtlP & constraint, int var, int arity);

// Extends a path of copy nodes to a lasso by following first successors.
Run extend(const CopyGraph & g, const std::vector<uint32_t> & path);

// Variables an Ltl mentions (bit k set for variable k).
unsigned vars_of(const Ltl & f);

// Splits conjunctions (also under G) into one-variable parts per variable
// and a remainder relating several variables.
void split_by_var(const LtlP & f, int arity, std::vector<std::vector<LtlP>> & per_var,
                  std::vector<LtlP> & rest);

struct Bits
{
  std::vector<uint64_t> w;

  Bits() = default;
  explicit Bits(size_t n) : w((n + 63) / 64, 0) {}
  void set(size_t k) { w[k >> 6] |= uint64_t(1) << (k & 63); }
  bool test(size_t k) const { return w[k >> 6] >> (k & 63) & 1; }
  bool any() const
  {
    for (uint64_t x : w)
      if (x) return true;
    return false;
  }
  size_t count() const;
  void or_with(const Bits & o)
  {
    for (size_t k = 0; k < w.size(); ++k) w[k] |= o.w[k];
  }
  template <class F>
  void each(F && f) const
  {
    for (size_t k = 0; k < w.size(); ++k)
      for (uint64_t x = w[k]; x; x &= x - 1) f(k * 64 + size_t(__builtin_ctzll(x)));
  }
  size_t first() const;
};

// valuations of a lasso's first n positions
std::vector<Valuation> decode_prefix(const Signature & sig, const Lasso & t, size_t n);

size_t lcm_capped(size_t a, size_t b);

}  // namespace dope::hyper::detail
