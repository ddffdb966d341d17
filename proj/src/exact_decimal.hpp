#pragma once

// Exact decimal arithmetic for configuration constants such as 3e-4 or 0.2.
// Values are taken at their shortest round-trip decimal form, combined
// exactly, and rounded to double once.

#include <boost/multiprecision/cpp_int.hpp>
#include <charconv>
#include <cstdlib>
#include <string>
#include <utility>

namespace avvp::detail {

using BigInt = boost::multiprecision::cpp_int;

// x == mantissa * 10^exponent, using the shortest representation of x.
inline std::pair<BigInt, long> to_decimal(double x) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::scientific);
  const std::string s(buf, res.ptr);
  const auto e_pos = s.find('e');
  std::string digits;
  long frac = 0;
  bool after_point = false;
  for (std::size_t i = 0; i < e_pos; ++i) {
    if (s[i] == '.') {
      after_point = true;
    } else {
      digits += s[i];
      frac += after_point;
    }
  }
  return {BigInt(digits), std::stol(s.substr(e_pos + 1)) - frac};
}

inline double decimal_to_double(const BigInt& mantissa, long exponent) {
  const std::string text = mantissa.str() + "e" + std::to_string(exponent);
  return std::strtod(text.c_str(), nullptr);
}

// num / den for positive den, expanded to 40 significant digits before the
// final rounding.
inline double quotient_to_double(BigInt num, const BigInt& den) {
  if (num == 0) return 0.0;
  const bool negative = num < 0;
  if (negative) num = -num;
  long exponent = 0;
  while (num / den < BigInt("1" + std::string(39, '0'))) {
    num *= 10;
    --exponent;
  }
  const double v = decimal_to_double(num / den, exponent);
  return negative ? -v : v;
}

}  // namespace avvp::detail
