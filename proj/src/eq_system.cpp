#include "geoprove/eq_system.hpp"

#include <cmath>
#include <stdexcept>

namespace geoprove {

namespace {

void factor_into(BigInt n, const Rational& sign, PrimeExponents& out) {
  auto bump = [&](const BigInt& p) {
    Rational& slot = out[p];
    slot += sign;
    if (slot == 0) out.erase(p);
  };
  for (BigInt p = 2; p * p <= n; p += (p == 2 ? 1 : 2)) {
    while (n % p == 0) {
      bump(p);
      n /= p;
    }
    // TODO: switch to Pollard rho if large ratio constants ever show up;
    // trial division is enough for the small constants tools produce.
    if (p > 1000000) break;
  }
  if (n > 1) bump(n);
}

}  // namespace

PrimeExponents factorize(const Rational& positive) {
  if (positive <= 0) throw std::invalid_argument("ratio constant must be positive");
  PrimeExponents out;
  factor_into(boost::multiprecision::numerator(positive), Rational(1), out);
  factor_into(boost::multiprecision::denominator(positive), Rational(-1), out);
  return out;
}

double log_value(const PrimeExponents& c) {
  double acc = 0.0;
  for (const auto& [p, e] : c) acc += to_double(e) * std::log(p.convert_to<double>());
  return acc;
}

std::string to_string(const PrimeExponents& c) {
  if (c.empty()) return "1";
  std::string out;
  for (const auto& [p, e] : c) {
    if (!out.empty()) out += "*";
    out += p.str();
    if (e != 1) out += "^(" + to_string(e) + ")";
  }
  return out;
}

}  // namespace geoprove
