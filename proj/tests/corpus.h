#pragma once

// Random small programs and contracts shared by the property suites.

#include <random>
#include <string>

#include "dope/contract.h"
#include "dope/lang/parser.h"

namespace corpus {

struct Options
{
  bool nondet = true;  // allow ":in" statements
  bool loops = false;  // allow bounded while loops
};

class Gen
{
 public:
  explicit Gen(unsigned seed, Options o = {}) : rng_(seed), o_(o) {}

  std::string program()
  {
    std::string s;
    nparams_ = pick(3);  // 0..2 parameters
    two_inputs_ = pick(2);
    for (int k = 0; k < nparams_; ++k) s += "param p" + std::to_string(k) + " in {0, 1};\n";
    s += "input x in [0, 2] step 0.5;\n";
    if (two_inputs_) s += "input z in {0, 1};\n";
    s += "var t in [-8, 8] step 0.25;\n";
    s += "output y in [-8, 8] step 0.25;\n";
    s += block(2);
    return s;
  }

  dope::Contract contract()
  {
    using dope::Value;
    dope::Contract c;
    const char * stdins[] = {"true", "x <= 1", "x in (0, 1]", "x >= 0.5 && x < 2", "x == 1"};
    c.stdin_spec = stdins[pick(5)];
    if (two_inputs_ && pick(2)) c.stdin_spec = "(" + c.stdin_spec + ") && z == 0";
    c.pintrs.predicate = nparams_ > 0 && pick(2) ? "p0 == 0 || p0 == 1" : "true";
    c.kappa_in = Value::raw(500000 * pick(4));
    c.kappa_out = Value::raw(250000 * pick(5));
    c.f = dope::BoundFn::affine(Value::raw(250000 * pick(5)), Value::raw(250000 * pick(3)));
    return c;
  }

  unsigned pick(unsigned n) { return rng_() % n; }

 private:
  std::string var_name()
  {
    unsigned r = pick(4 + nparams_ + (two_inputs_ ? 1 : 0));
    if (r < 2) return "x";
    if (r == 2) return "t";
    if (r == 3) return "y";
    if (r < 4u + nparams_) return "p" + std::to_string(r - 4);
    return "z";
  }

  std::string num(int depth)
  {
    unsigned r = depth <= 0 ? pick(2) : pick(6);
    switch (r) {
      case 0: return var_name();
      case 1: return std::to_string(pick(3)) + (pick(2) ? ".5" : "");
      case 2: return "(" + num(depth - 1) + " + " + num(depth - 1) + ")";
      case 3: return "(" + num(depth - 1) + " - " + num(depth - 1) + ")";
      case 4: return "abs(" + num(depth - 1) + ")";
      default: return "(" + num(depth - 1) + " * " + std::to_string(pick(2) + 1) + ")";
    }
  }

  std::string cond(int depth)
  {
    const char * ops[] = {"<", "<=", "==", "!=", ">"};
    unsigned r = depth <= 0 ? 0 : pick(4);
    switch (r) {
      case 0: return num(1) + " " + ops[pick(5)] + " " + num(1);
      case 1: return "(" + cond(depth - 1) + " && " + cond(depth - 1) + ")";
      case 2: return "(" + cond(depth - 1) + " || " + cond(depth - 1) + ")";
      default: return "!(" + cond(depth - 1) + ")";
    }
  }

  std::string stmt(int depth)
  {
    unsigned r = depth <= 0 ? pick(2) : pick(o_.loops ? 5 : 4);
    std::string target = pick(2) ? "y" : "t";
    switch (r) {
      case 0:
      case 1:
        if (o_.nondet && pick(4) == 0) {
          std::string lo = num(1);
          return target + " :in [" + lo + ", " + lo + " + " + std::to_string(pick(2)) + "]";
        }
        return target + " := " + num(2);
      case 2:
      case 3: return "if " + cond(1) + " {\n" + block(depth - 1) + "\n} else {\n" + block(depth - 1) + "\n}";
      default:
        // bounded by construction: t strictly increases towards 2
        return "t := 0; while t < " + std::to_string(pick(3)) + " { t := t + 0.5; y := y + " + num(0) + " }";
    }
  }

  std::string block(int depth)
  {
    std::string s = stmt(depth);
    for (unsigned k = pick(3); k > 0; --k) s += ";\n" + stmt(depth);
    return s;
  }

  std::mt19937 rng_;
  Options o_;
  int nparams_ = 0;
  bool two_inputs_ = false;
};

}  // namespace corpus
