#include "geoprove/rational.hpp"

namespace geoprove {

Rational floor_rational(const Rational& q) {
  BigInt n = boost::multiprecision::numerator(q);
  BigInt d = boost::multiprecision::denominator(q);
  BigInt f = n / d;  // truncates toward zero
  if (n < 0 && f * d != n) f -= 1;
  return Rational(f);
}

Rational mod_one(const Rational& q) { return q - floor_rational(q); }

double to_double(const Rational& q) { return q.convert_to<double>(); }

std::string to_string(const Rational& q) {
  BigInt d = boost::multiprecision::denominator(q);
  if (d == 1) return boost::multiprecision::numerator(q).str();
  return boost::multiprecision::numerator(q).str() + "/" + d.str();
}

}  // namespace geoprove
