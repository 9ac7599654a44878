#pragma once

#include <cstdint>
#include <string>

#include <boost/multiprecision/cpp_int.hpp>

namespace geoprove {

using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

inline Rational make_rational(std::int64_t num, std::int64_t den = 1) {
  return Rational(BigInt(num), BigInt(den));
}

/// Representative of q mod 1 in [0, 1).
Rational mod_one(const Rational& q);
Rational floor_rational(const Rational& q);
double to_double(const Rational& q);
/// "n" or "n/d".
std::string to_string(const Rational& q);

}  // namespace geoprove
