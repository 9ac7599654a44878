#pragma once

#include <bit>
#include <compare>
#include <cstdint>
#include <string>
#include <tuple>

#include "geoprove/rational.hpp"

namespace geoprove {

/// Hyperparameter literal: integer, float, or fraction n/d.
struct Hyper {
  enum class Type : std::uint8_t { Int, Float, Fraction };

  Type type = Type::Int;
  std::int64_t num = 0;
  std::int64_t den = 1;
  double value = 0.0;

  static Hyper integer(std::int64_t n) { return {Type::Int, n, 1, static_cast<double>(n)}; }
  static Hyper floating(double v) { return {Type::Float, 0, 1, v}; }
  static Hyper fraction(std::int64_t n, std::int64_t d) {
    return {Type::Fraction, n, d, static_cast<double>(n) / static_cast<double>(d)};
  }

  bool is_rational() const { return type != Type::Float; }
  double as_double() const { return value; }
  Rational as_rational() const { return make_rational(num, den); }

  std::tuple<Type, std::int64_t, std::int64_t, std::uint64_t> tie() const {
    return {type, num, den, std::bit_cast<std::uint64_t>(value)};
  }
  friend bool operator==(const Hyper& a, const Hyper& b) { return a.tie() == b.tie(); }
  friend std::strong_ordering operator<=>(const Hyper& a, const Hyper& b) {
    return a.tie() <=> b.tie();
  }
};

std::string to_string(const Hyper& h);

}  // namespace geoprove
