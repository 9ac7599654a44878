#pragma once

// Brute-force reference for the equation systems. Rows are kept dense and
// never reduced; a row follows from the accepted rows iff its coefficient
// vector is a combination sum(l_i * row_i), found by Gauss-Jordan
// elimination on the transposed system, and the constants combine the same
// way (mod 1 for angles, as prime exponent vectors for ratios).

#include <map>
#include <optional>
#include <random>
#include <vector>

#include "geoprove/eq_system.hpp"

namespace oracle {

using geoprove::Rational;
using Vec = std::vector<Rational>;

/// Multipliers l with sum l_i * rows[i] == target, if any.
inline std::optional<Vec> combination(const std::vector<Vec>& rows, const Vec& target) {
  const std::size_t k = rows.size(), n = target.size();
  std::vector<Vec> m(n, Vec(k + 1));
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t i = 0; i < k; ++i) m[j][i] = rows[i][j];
    m[j][k] = target[j];
  }
  std::vector<int> pivot_row(k, -1);
  std::size_t r = 0;
  for (std::size_t col = 0; col < k && r < n; ++col) {
    std::size_t p = r;
    while (p < n && m[p][col] == 0) ++p;
    if (p == n) continue;
    std::swap(m[p], m[r]);
    Rational inv = 1 / m[r][col];
    for (auto& x : m[r]) x *= inv;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == r || m[j][col] == 0) continue;
      Rational f = m[j][col];
      for (std::size_t c = 0; c <= k; ++c) m[j][c] -= f * m[r][c];
    }
    pivot_row[col] = static_cast<int>(r++);
  }
  for (std::size_t j = r; j < n; ++j)
    if (m[j][k] != 0) return std::nullopt;
  Vec l(k);
  for (std::size_t i = 0; i < k; ++i)
    if (pivot_row[i] >= 0) l[i] = m[static_cast<std::size_t>(pivot_row[i])][k];
  return l;
}

inline Rational frac_part(const Rational& x) {
  using boost::multiprecision::numerator;
  using boost::multiprecision::denominator;
  geoprove::BigInt n = numerator(x), d = denominator(x);
  geoprove::BigInt q = n / d;
  if (q * d > n) q -= 1;  // floor for negatives
  return x - Rational(q);
}

/// Exponents of a positive rational over primes, by trial division.
inline std::map<long, Rational> exponents(const Rational& x) {
  using boost::multiprecision::numerator;
  using boost::multiprecision::denominator;
  std::map<long, Rational> out;
  auto factor = [&](geoprove::BigInt v, int sign) {
    for (long p = 2; v > 1; ++p) {
      while (v % p == 0) {
        out[p] += sign;
        v /= p;
      }
    }
  };
  factor(numerator(x), 1);
  factor(denominator(x), -1);
  for (auto it = out.begin(); it != out.end();) it = it->second == 0 ? out.erase(it) : std::next(it);
  return out;
}

enum class Answer { Added, Redundant, Contradiction };

/// Angle flavour: constants are rationals compared mod 1.
struct AngleOracle {
  std::size_t nvars;
  std::vector<Vec> rows;
  std::vector<Rational> consts;

  bool implied_const(const Vec& l, const Rational& c) const {
    Rational sum = 0;
    for (std::size_t i = 0; i < l.size(); ++i) sum += l[i] * consts[i];
    return frac_part(sum - c) == 0;
  }
  Answer insert(const Vec& coeffs, const Rational& c) {
    if (auto l = combination(rows, coeffs))
      return implied_const(*l, frac_part(c)) ? Answer::Redundant : Answer::Contradiction;
    rows.push_back(coeffs);
    consts.push_back(frac_part(c));
    return Answer::Added;
  }
  bool query(const Vec& coeffs, const Rational& c) const {
    auto l = combination(rows, coeffs);
    return l && implied_const(*l, frac_part(c));
  }
};

/// Ratio flavour: constants are positive rationals, combined as powers.
struct RatioOracle {
  std::size_t nvars;
  std::vector<Vec> rows;
  std::vector<std::map<long, Rational>> consts;

  bool implied_const(const Vec& l, const Rational& c) const {
    std::map<long, Rational> sum;
    for (std::size_t i = 0; i < l.size(); ++i)
      for (const auto& [p, e] : consts[i]) sum[p] += l[i] * e;
    for (auto it = sum.begin(); it != sum.end();) it = it->second == 0 ? sum.erase(it) : std::next(it);
    return sum == exponents(c);
  }
  Answer insert(const Vec& coeffs, const Rational& c) {
    if (auto l = combination(rows, coeffs))
      return implied_const(*l, c) ? Answer::Redundant : Answer::Contradiction;
    rows.push_back(coeffs);
    consts.push_back(exponents(c));
    return Answer::Added;
  }
  bool query(const Vec& coeffs, const Rational& c) const {
    auto l = combination(rows, coeffs);
    return l && implied_const(*l, c);
  }
};

inline Answer from_status(geoprove::InsertStatus s) {
  switch (s) {
    case geoprove::InsertStatus::Added: return Answer::Added;
    case geoprove::InsertStatus::Redundant: return Answer::Redundant;
    case geoprove::InsertStatus::Contradiction: return Answer::Contradiction;
  }
  return Answer::Contradiction;
}

template <class Row>
Row to_row(const Vec& coeffs) {
  Row r;
  for (std::size_t v = 0; v < coeffs.size(); ++v)
    if (coeffs[v] != 0) r.coeffs[static_cast<geoprove::VarId>(v)] = coeffs[v];
  return r;
}

/// Outcome of one randomized comparison run.
struct RunStats {
  int systems = 0;
  int queries = 0;
  int true_answers = 0;
  int mismatches = 0;
  int contradictions = 0;
};

/// Random entries n/d with |n|, d <= 7.
struct Gen {
  std::mt19937 rng;
  explicit Gen(unsigned seed) : rng(seed) {}
  int uniform(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }
  Rational coeff() {
    int n = uniform(1, 7) * (uniform(0, 1) ? 1 : -1);
    return Rational(n, uniform(1, 7));
  }
  Rational angle_const() { return Rational(uniform(-7, 7), uniform(1, 7)); }
  Rational ratio_const() { return Rational(uniform(1, 7), uniform(1, 7)); }
  Vec row(std::size_t n) {
    Vec v(n);
    for (auto& x : v)
      if (uniform(0, 1)) x = coeff();
    return v;
  }
};

/// Builds one random system (<= 8 vars, <= 8 rows) in both the library and
/// the oracle, then compares insert outcomes and query answers.
template <class System, class Oracle, class MakeConst, class ScaleConst>
void compare_one(Gen& g, RunStats& stats, MakeConst make_const, ScaleConst combine) {
  using Row = typename System::Row;
  const std::size_t nvars = static_cast<std::size_t>(g.uniform(1, 8));
  const int nrows = g.uniform(1, 8);
  System sys;
  Oracle ref{nvars, {}, {}};
  std::vector<std::pair<Vec, Rational>> inserted;
  for (int i = 0; i < nrows; ++i) {
    Vec v = g.row(nvars);
    Rational c = make_const();
    Row r = to_row<Row>(v);
    r.constant = combine.input(c);
    Answer want = ref.insert(v, c);
    Answer got = from_status(sys.insert(r));
    if (want != got) ++stats.mismatches;
    if (want == Answer::Contradiction) ++stats.contradictions;
    if (want == Answer::Added) inserted.emplace_back(v, c);
  }
  for (int q = 0; q < 12; ++q) {
    Vec v;
    Rational c;
    if (q % 2 == 0 || inserted.empty()) {
      v = g.row(nvars);
      c = make_const();
    } else {
      // A combination of accepted rows, with the implied constant or a
      // perturbed one.
      v.assign(nvars, Rational(0));
      std::vector<std::pair<Rational, Rational>> parts;
      for (const auto& [row, rc] : inserted) {
        if (!g.uniform(0, 1)) continue;
        Rational l(g.uniform(-3, 3), g.uniform(1, 3));
        for (std::size_t j = 0; j < nvars; ++j) v[j] += l * row[j];
        parts.emplace_back(l, rc);
      }
      c = combine.implied(parts, g.uniform(0, 3));
    }
    Row r = to_row<Row>(v);
    r.constant = combine.input(c);
    bool want = ref.query(v, c);
    bool got = sys.query(r);
    ++stats.queries;
    if (want) ++stats.true_answers;
    if (want != got) ++stats.mismatches;
  }
  ++stats.systems;
}

struct AngleCombine {
  Rational input(const Rational& c) const { return c; }
  Rational implied(const std::vector<std::pair<Rational, Rational>>& parts, int twist) const {
    Rational s = 0;
    for (const auto& [l, c] : parts) s += l * frac_part(c);
    if (twist == 1) s += 1;              // same class mod 1
    if (twist == 2) s += Rational(1, 2);  // different class
    return s;
  }
};

/// Ratio constants must stay rational, so implied constants are only built
/// from integer multipliers; other combinations are dropped to 1.
struct RatioCombine {
  geoprove::PrimeExponents input(const Rational& c) const { return geoprove::factorize(c); }
  Rational implied(const std::vector<std::pair<Rational, Rational>>& parts, int twist) const {
    Rational s = 1;
    for (const auto& [l, c] : parts) {
      using boost::multiprecision::denominator;
      using boost::multiprecision::numerator;
      if (denominator(l) != 1) return Rational(twist + 1);
      long e = numerator(l).convert_to<long>();
      Rational base = e < 0 ? 1 / c : c;
      for (long i = 0; i < std::abs(e); ++i) s *= base;
    }
    if (twist == 2) s *= 2;
    return s;
  }
};

inline RunStats run_angle(int systems, unsigned seed) {
  Gen g(seed);
  RunStats stats;
  for (int i = 0; i < systems; ++i)
    compare_one<geoprove::AngleSystem, AngleOracle>(g, stats, [&] { return g.angle_const(); },
                                                    AngleCombine{});
  return stats;
}

inline RunStats run_ratio(int systems, unsigned seed) {
  Gen g(seed);
  RunStats stats;
  for (int i = 0; i < systems; ++i)
    compare_one<geoprove::RatioSystem, RatioOracle>(g, stats, [&] { return g.ratio_const(); },
                                                    RatioCombine{});
  return stats;
}

}  // namespace oracle
