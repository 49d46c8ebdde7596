#include "dope/value.h"

#include <cctype>
#include <cmath>
#include <limits>
#include <ostream>

#include "dope/errors.h"

namespace dope {

namespace {

using i128 = __int128;

int64_t narrow(i128 x)
{
  if (x > std::numeric_limits<int64_t>::max()
      || x < std::numeric_limits<int64_t>::min()) {
    throw EvalError("fixed-point overflow");
  }
  return static_cast<int64_t>(x);
}

// num/den rounded half away from zero
i128 div_round(i128 num, i128 den)
{
  bool neg = (num < 0) != (den < 0);
  if (num < 0) num = -num;
  if (den < 0) den = -den;
  i128 q = num / den;
  i128 r = num % den;
  if (2 * r >= den) ++q;
  return neg ? -q : q;
}

}  // namespace

Value Value::parse(std::string_view s)
{
  std::string t(s);
  if (t == "inf" || t == "+inf" || t == "infinity") return infinity();
  size_t i = 0;
  bool neg = false;
  if (i < t.size() && (t[i] == '-' || t[i] == '+')) {
    neg = t[i] == '-';
    ++i;
  }
  i128 ip = 0;
  size_t digits = 0;
  while (i < t.size() && std::isdigit(static_cast<unsigned char>(t[i]))) {
    ip = ip * 10 + (t[i] - '0');
    if (ip > std::numeric_limits<int64_t>::max() / kScale)
      throw DataError("number out of range: " + t);
    ++i;
    ++digits;
  }
  i128 frac = 0;
  int fd = 0;
  if (i < t.size() && t[i] == '.') {
    ++i;
    while (i < t.size() && std::isdigit(static_cast<unsigned char>(t[i]))) {
      if (fd == kDigits) {
        if (t[i] != '0')
          throw DataError("number '" + t + "' has more than "
                          + std::to_string(kDigits) + " decimals");
      } else {
        frac = frac * 10 + (t[i] - '0');
        ++fd;
      }
      ++i;
      ++digits;
    }
  }
  if (digits == 0 || i != t.size()) throw DataError("bad number: '" + t + "'");
  for (int k = fd; k < kDigits; ++k) frac *= 10;
  i128 m = ip * kScale + frac;
  return raw(narrow(neg ? -m : m));
}

Value Value::from_double(double d)
{
  if (std::isinf(d) && d > 0) return infinity();
  if (!std::isfinite(d)) throw DataError("non-finite number");
  double scaled = d * static_cast<double>(kScale);
  double r = std::round(scaled);
  if (std::fabs(scaled - r) > 1e-3 * std::max(1.0, std::fabs(scaled) * 1e-9))
    throw DataError("number " + std::to_string(d) + " has more than "
                    + std::to_string(kDigits) + " decimals");
  if (std::fabs(r) > 9.2e18) throw DataError("number out of range");
  return raw(static_cast<int64_t>(r));
}

double Value::to_double() const
{
  if (inf_) return std::numeric_limits<double>::infinity();
  return static_cast<double>(m_) / static_cast<double>(kScale);
}

std::string Value::str() const
{
  if (inf_) return "inf";
  int64_t a = m_ < 0 ? -m_ : m_;
  std::string s = std::to_string(a / kScale);
  int64_t f = a % kScale;
  if (f != 0) {
    std::string fs = std::to_string(f);
    fs.insert(0, kDigits - fs.size(), '0');
    while (fs.back() == '0') fs.pop_back();
    s += "." + fs;
  }
  return m_ < 0 ? "-" + s : s;
}

Value Value::operator-() const
{
  if (inf_) throw EvalError("negation of infinity");
  return raw(-m_);
}

Value Value::operator+(const Value & o) const
{
  if (inf_ || o.inf_) return infinity();
  return raw(narrow(static_cast<i128>(m_) + o.m_));
}

Value Value::operator-(const Value & o) const
{
  if (o.inf_) throw EvalError("subtraction of infinity");
  if (inf_) return infinity();
  return raw(narrow(static_cast<i128>(m_) - o.m_));
}

Value Value::operator*(const Value & o) const
{
  if (inf_ || o.inf_) {
    const Value & f = inf_ ? o : *this;
    if (!f.inf_ && f.m_ <= 0) throw EvalError("infinity times non-positive");
    return infinity();
  }
  return raw(narrow(div_round(static_cast<i128>(m_) * o.m_, kScale)));
}

Value Value::operator/(const Value & o) const
{
  if (o.inf_) {
    if (inf_) throw EvalError("infinity divided by infinity");
    return Value();
  }
  if (o.m_ == 0) throw EvalError("division by zero");
  if (inf_) {
    if (o.m_ < 0) throw EvalError("infinity divided by negative");
    return infinity();
  }
  return raw(narrow(div_round(static_cast<i128>(m_) * kScale, o.m_)));
}

Value Value::abs() const
{
  if (inf_) return *this;
  return raw(m_ < 0 ? -m_ : m_);
}

Value Value::pow(unsigned n) const
{
  if (n == 0) return integer(1);
  if (inf_) return infinity();
  // exact product of mantissas, one rounding at the end
  i128 num = m_;
  i128 den = 1;
  const i128 lim = static_cast<i128>(1) << 100;
  const i128 am = m_ < 0 ? -static_cast<i128>(m_) : m_;
  for (unsigned k = 1; k < n; ++k) {
    if (am != 0 && (num > lim / am || num < -lim / am || den > lim / kScale)) {
      // fall back to stepwise rounding for large exponents
      Value acc = *this;
      for (unsigned j = 1; j < n; ++j) acc = acc * *this;
      return acc;
    }
    num *= m_;
    den *= kScale;
  }
  return raw(narrow(div_round(num, den)));
}

std::ostream & operator<<(std::ostream & os, const Value & v)
{
  return os << v.str();
}

std::string to_string(const Valuation & v)
{
  std::string s = "(";
  for (size_t i = 0; i < v.size(); ++i) {
    if (i) s += ", ";
    s += v[i].str();
  }
  return s + ")";
}

void to_json(nlohmann::json & j, const Value & v)
{
  if (v.is_inf()) {
    j = "inf";
  } else if (v.mantissa() % Value::kScale == 0) {
    j = v.mantissa() / Value::kScale;
  } else {
    j = v.to_double();
  }
}

void from_json(const nlohmann::json & j, Value & v)
{
  if (j.is_string()) {
    v = Value::parse(j.get<std::string>());
  } else if (j.is_number_integer()) {
    v = Value::integer(j.get<int64_t>());
  } else if (j.is_number()) {
    v = Value::from_double(j.get<double>());
  } else {
    throw DataError("expected a number, got " + j.dump());
  }
}

}  // namespace dope
