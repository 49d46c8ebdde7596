#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace dope {

// Fixed-point scalar: mantissa * 10^-6, or +inf.
// Arithmetic rounds half away from zero; equality and ordering are exact.
class Value
{
 public:
  static constexpr int kDigits = 6;
  static constexpr int64_t kScale = 1000000;

  constexpr Value() = default;

  static constexpr Value raw(int64_t m)
  {
    Value v;
    v.m_ = m;
    return v;
  }
  static constexpr Value integer(int64_t n) { return raw(n * kScale); }
  static constexpr Value infinity()
  {
    Value v;
    v.inf_ = true;
    return v;
  }
  // "0.25", "-3", "inf"; throws DataError on more than kDigits decimals
  static Value parse(std::string_view s);
  // rounds to the grid of the scale; rejects values not within 1e-9 of it
  static Value from_double(double d);

  bool is_inf() const { return inf_; }
  int64_t mantissa() const { return m_; }
  double to_double() const;
  std::string str() const;

  Value operator-() const;
  Value operator+(const Value & o) const;
  Value operator-(const Value & o) const;
  Value operator*(const Value & o) const;
  Value operator/(const Value & o) const;
  Value abs() const;
  Value pow(unsigned n) const;

  bool operator==(const Value & o) const = default;
  std::strong_ordering operator<=>(const Value & o) const
  {
    if (inf_ || o.inf_) return inf_ <=> o.inf_;
    return m_ <=> o.m_;
  }

 private:
  int64_t m_ = 0;
  bool inf_ = false;
};

std::ostream & operator<<(std::ostream & os, const Value & v);

using Valuation = std::vector<Value>;

std::string to_string(const Valuation & v);

void to_json(nlohmann::json & j, const Value & v);
void from_json(const nlohmann::json & j, Value & v);

}  // namespace dope

template <>
struct std::hash<dope::Value>
{
  size_t operator()(const dope::Value & v) const noexcept
  {
    return v.is_inf() ? 0x9e3779b97f4a7c15ull
                      : std::hash<int64_t>()(v.mantissa());
  }
};
