#pragma once

// Scalar abstraction: every algorithm in this library is parameterized over
// the arithmetic type.  Two instantiations are supported:
//   - double:   fast, comparisons use a fixed 1e-9 tolerance;
//   - Rational: exact arbitrary-precision rationals, comparisons are exact.

#include <boost/multiprecision/cpp_int.hpp>

#include <charconv>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace stopgame {

using Rational = boost::multiprecision::cpp_rational;
using BigInt = boost::multiprecision::cpp_int;

namespace detail {

inline BigInt pow10(unsigned k) {
  BigInt r = 1;
  for (unsigned i = 0; i < k; ++i) r *= 10;
  return r;
}

// strict decimal integer parse; leading zeros are stripped because the
// big-integer string constructor would treat them as an octal prefix
inline BigInt parse_decimal_int(const std::string& text) {
  if (text.empty()) throw std::invalid_argument("empty integer string");
  std::size_t pos = 0;
  bool neg = false;
  if (text[0] == '+' || text[0] == '-') {
    neg = text[0] == '-';
    pos = 1;
  }
  std::string digits = text.substr(pos);
  if (digits.empty()) throw std::invalid_argument("malformed integer string: " + text);
  for (char c : digits)
    if (!std::isdigit(static_cast<unsigned char>(c)))
      throw std::invalid_argument("malformed integer string: " + text);
  std::size_t first = digits.find_first_not_of('0');
  digits = first == std::string::npos ? "0" : digits.substr(first);
  BigInt v(digits);
  return neg ? BigInt(-v) : v;
}

}  // namespace detail

// Accepts plain integers ("-1"), decimal strings ("0.25") and fraction
// strings ("3/7").  Decimal strings parse exactly (no binary rounding).
inline Rational parse_rational(const std::string& text) {
  if (text.empty()) throw std::invalid_argument("empty numeric string");
  auto slash = text.find('/');
  if (slash != std::string::npos) {
    BigInt num = detail::parse_decimal_int(text.substr(0, slash));
    BigInt den = detail::parse_decimal_int(text.substr(slash + 1));
    if (den == 0) throw std::invalid_argument("zero denominator: " + text);
    return Rational(num, den);
  }
  std::string s = text;
  bool neg = false;
  std::size_t pos = 0;
  if (s[pos] == '+' || s[pos] == '-') {
    neg = s[pos] == '-';
    ++pos;
  }
  auto dot = s.find('.', pos);
  std::string ipart = s.substr(pos, dot == std::string::npos ? std::string::npos : dot - pos);
  std::string fpart = dot == std::string::npos ? "" : s.substr(dot + 1);
  if (ipart.empty() && fpart.empty())
    throw std::invalid_argument("malformed numeric string: " + text);
  if (ipart.empty()) ipart = "0";
  std::string digits = ipart + fpart;
  for (char c : digits)
    if (!std::isdigit(static_cast<unsigned char>(c)))
      throw std::invalid_argument("malformed numeric string: " + text);
  // a leading zero would switch the big-integer parser into octal mode
  std::size_t first = digits.find_first_not_of('0');
  digits = first == std::string::npos ? "0" : digits.substr(first);
  BigInt num(digits);
  BigInt den = detail::pow10(static_cast<unsigned>(fpart.size()));
  if (neg) num = -num;
  return Rational(num, den);
}

// Decimal representation when the reduced denominator is of the form 2^a 5^b,
// otherwise "p/q".  Either form round-trips through parse_rational.
inline std::string rational_to_string(const Rational& q) {
  BigInt num = boost::multiprecision::numerator(q);
  BigInt den = boost::multiprecision::denominator(q);
  BigInt d = den;
  unsigned twos = 0, fives = 0;
  while (d % 2 == 0) { d /= 2; ++twos; }
  while (d % 5 == 0) { d /= 5; ++fives; }
  if (d != 1) return num.str() + "/" + den.str();
  unsigned k = std::max(twos, fives);
  if (k == 0) return num.str();
  BigInt scaled = num * detail::pow10(k) / den;
  bool neg = scaled < 0;
  std::string digits = BigInt(boost::multiprecision::abs(scaled)).str();
  if (digits.size() <= k) digits.insert(0, k + 1 - digits.size(), '0');
  digits.insert(digits.size() - k, ".");
  return (neg ? "-" : "") + digits;
}

inline std::string double_to_string(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

template <class S>
struct scalar_traits;

template <>
struct scalar_traits<double> {
  static constexpr bool exact = false;
  static double tolerance() { return 1e-9; }
  static double from_int(long long n) { return static_cast<double>(n); }
  static double from_fraction(long long num, long long den) {
    return static_cast<double>(num) / static_cast<double>(den);
  }
  static double parse(const std::string& text) {
    auto slash = text.find('/');
    if (slash != std::string::npos)
      return std::stod(text.substr(0, slash)) / std::stod(text.substr(slash + 1));
    return std::stod(text);
  }
  static std::string to_string(double v) { return double_to_string(v); }
  static double to_double(double v) { return v; }
};

template <>
struct scalar_traits<Rational> {
  static constexpr bool exact = true;
  static Rational tolerance() { return Rational(0); }
  static Rational from_int(long long n) { return Rational(n); }
  static Rational from_fraction(long long num, long long den) {
    return Rational(num, den);
  }
  static Rational parse(const std::string& text) { return parse_rational(text); }
  static std::string to_string(const Rational& q) { return rational_to_string(q); }
  static double to_double(const Rational& q) { return q.convert_to<double>(); }
};

template <class S>
S abs_val(const S& v) {
  return v < S(0) ? S(-v) : v;
}

// a == b up to the mode tolerance
template <class S>
bool approx_eq(const S& a, const S& b) {
  return abs_val<S>(a - b) <= scalar_traits<S>::tolerance();
}

// a <= b up to the mode tolerance
template <class S>
bool approx_le(const S& a, const S& b) {
  return a <= b + scalar_traits<S>::tolerance();
}

template <class S>
bool approx_ge(const S& a, const S& b) {
  return approx_le<S>(b, a);
}

}  // namespace stopgame
