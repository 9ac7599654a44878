#pragma once

// Exact linear equation systems over the rationals, kept in reduced row
// echelon form. Two instantiations are used by the logic core:
//
//   AngleSystem  sum q_i * x_i = c   with c compared mod 1 (half-turns)
//   RatioSystem  prod x_i^q_i = c    stored in log space; c is a positive
//                                    rational kept as a vector of prime
//                                    exponents so that rational powers of
//                                    it stay exact
//
// Constants are carried exactly through elimination. Input constants of the
// angle system are reduced into [0, 1) on entry and comparisons are mod 1.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "geoprove/rational.hpp"

namespace geoprove {

using VarId = std::uint32_t;

/// Positive rational written as prod p^e over primes p with rational e.
using PrimeExponents = std::map<BigInt, Rational>;

PrimeExponents factorize(const Rational& positive);
/// Numeric value of log(c).
double log_value(const PrimeExponents& c);
std::string to_string(const PrimeExponents& c);

struct AngleTraits {
  using Const = Rational;
  static Const zero() { return Rational(0); }
  static void add_scaled(Const& acc, const Const& c, const Rational& k) { acc += c * k; }
  static bool is_zero(const Const& c) { return mod_one(c) == 0; }
  static Const canonical(const Const& c) { return mod_one(c); }
  static Const from_input(const Const& c) { return mod_one(c); }
};

struct RatioTraits {
  using Const = PrimeExponents;
  static Const zero() { return {}; }
  static void add_scaled(Const& acc, const Const& c, const Rational& k) {
    for (const auto& [p, e] : c) {
      Rational& slot = acc[p];
      slot += e * k;
      if (slot == 0) acc.erase(p);
    }
  }
  static bool is_zero(const Const& c) { return c.empty(); }
  static Const canonical(const Const& c) { return c; }
  static Const from_input(const Const& c) { return c; }
};

template <class Traits>
struct LinearRow {
  using Const = typename Traits::Const;
  std::map<VarId, Rational> coeffs;  // no zero entries
  Const constant = Traits::zero();
  /// Multiple of every denominator of the multipliers expressing this row
  /// in the inserted rows. Angle rows hold numerically (mod 1) only after
  /// scaling by it, since dividing a mod-1 equation is not well defined.
  BigInt denom = 1;

  void add_scaled(const LinearRow& other, const Rational& k) {
    for (const auto& [v, q] : other.coeffs) {
      Rational& slot = coeffs[v];
      slot += q * k;
      if (slot == 0) coeffs.erase(v);
    }
    Traits::add_scaled(constant, other.constant, k);
    denom = boost::multiprecision::lcm(denom, boost::multiprecision::denominator(k) * other.denom);
  }

  bool operator==(const LinearRow&) const = default;
};

enum class InsertStatus { Added, Redundant, Contradiction };

template <class Traits>
class LinearSystem {
 public:
  using Const = typename Traits::Const;
  using Row = LinearRow<Traits>;

  /// Adds the row (constant taken as given, after input canonicalization).
  InsertStatus insert(Row row) {
    row.constant = Traits::from_input(row.constant);
    row.denom = 1;
    return insert_exact(std::move(row));
  }

  bool query(const Row& row) const {
    Row r = row;
    r.constant = Traits::from_input(r.constant);
    reduce(r);
    return r.coeffs.empty() && Traits::is_zero(r.constant);
  }

  /// Replaces variable `from` by `to` everywhere. Returns Contradiction when
  /// the substitution makes the system inconsistent; the system is then left
  /// in its substituted (inconsistent-row-dropped) form and the caller is
  /// expected to roll back.
  InsertStatus rename(VarId from, VarId to) {
    if (from == to) return InsertStatus::Redundant;
    std::vector<Row> old;
    old.reserve(rows_.size());
    for (auto& [p, r] : rows_) old.push_back(std::move(r));
    rows_.clear();
    InsertStatus status = InsertStatus::Redundant;
    for (Row& r : old) {
      auto it = r.coeffs.find(from);
      if (it != r.coeffs.end()) {
        Rational q = it->second;
        r.coeffs.erase(it);
        Rational& slot = r.coeffs[to];
        slot += q;
        if (slot == 0) r.coeffs.erase(to);
      }
      InsertStatus s = insert_exact(std::move(r));
      if (s == InsertStatus::Contradiction) status = s;
    }
    return status;
  }

  /// Expression of `v` in the free variables: v = constant - sum(coeffs).
  /// Returned as a row whose coefficients are those of `v`'s reduced form.
  Row normal_form(VarId v) const {
    Row r;
    r.coeffs[v] = 1;
    reduce(r);
    return r;
  }

  bool contains_var(VarId v) const {
    if (rows_.count(v)) return true;
    for (const auto& [p, r] : rows_)
      if (r.coeffs.count(v)) return true;
    return false;
  }

  std::vector<VarId> variables() const {
    std::map<VarId, bool> seen;
    for (const auto& [p, r] : rows_)
      for (const auto& [v, q] : r.coeffs) seen[v] = true;
    std::vector<VarId> out;
    for (const auto& [v, b] : seen) out.push_back(v);
    return out;
  }

  const std::map<VarId, Row>& rows() const { return rows_; }
  std::size_t size() const { return rows_.size(); }
  bool empty() const { return rows_.empty(); }

 private:
  void reduce(Row& r) const {
    std::vector<std::pair<VarId, Rational>> hits;
    for (const auto& [v, q] : r.coeffs)
      if (rows_.count(v)) hits.emplace_back(v, q);
    for (const auto& [v, q] : hits) r.add_scaled(rows_.at(v), -q);
  }

  InsertStatus insert_exact(Row r) {
    reduce(r);
    if (r.coeffs.empty())
      return Traits::is_zero(r.constant) ? InsertStatus::Redundant : InsertStatus::Contradiction;
    VarId pivot = r.coeffs.begin()->first;
    Rational inv = Rational(1) / r.coeffs.begin()->second;
    Row normalized;
    normalized.add_scaled(r, inv);
    for (auto& [p, other] : rows_) {
      auto it = other.coeffs.find(pivot);
      if (it == other.coeffs.end()) continue;
      Rational k = -it->second;
      other.add_scaled(normalized, k);
    }
    rows_.emplace(pivot, std::move(normalized));
    return InsertStatus::Added;
  }

  // keyed by pivot variable; the pivot has coefficient 1 and appears in no
  // other row
  std::map<VarId, Row> rows_;
};

using AngleSystem = LinearSystem<AngleTraits>;
using RatioSystem = LinearSystem<RatioTraits>;
using AngleRow = AngleSystem::Row;
using RatioRow = RatioSystem::Row;

}  // namespace geoprove
