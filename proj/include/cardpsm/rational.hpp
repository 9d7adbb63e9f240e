#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <string>
#include <string_view>

#include "error.hpp"

namespace cardpsm {

using Rational = boost::multiprecision::cpp_rational;
using BigInt = boost::multiprecision::cpp_int;

/// Serialized form is always "num/den", including integers ("1/1").
inline std::string to_string(const Rational& r) {
  return boost::multiprecision::numerator(r).str() + "/" +
         boost::multiprecision::denominator(r).str();
}

inline Rational parse_rational(std::string_view text) {
  const auto slash = text.find('/');
  try {
    if (slash == std::string_view::npos) {
      return Rational(BigInt(std::string(text)));
    }
    BigInt num(std::string(text.substr(0, slash)));
    BigInt den(std::string(text.substr(slash + 1)));
    if (den == 0) throw Error(ErrorCode::parse_error, "zero denominator in '" + std::string(text) + "'");
    return Rational(num, den);
  } catch (const std::runtime_error& e) {
    if (dynamic_cast<const Error*>(&e)) throw;
    throw Error(ErrorCode::parse_error, "bad rational '" + std::string(text) + "'");
  }
}

inline BigInt pow2(std::size_t e) {
  BigInt one = 1;
  return one << e;
}

/// Smallest b with 2^b >= value (0 for value <= 1).
inline std::size_t ceil_log2(std::size_t value) {
  std::size_t bits = 0;
  while ((std::size_t{1} << bits) < value) ++bits;
  return bits;
}

}  // namespace cardpsm
