#pragma once

// The logical core: constructed objects with their numerical values, the
// knowledge database (union-find, angle and ratio equation systems, tool
// lookup table) and the propagation pump that keeps it closed under
// equality.

#include <compare>
#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "geoprove/eq_system.hpp"
#include "geoprove/hyper.hpp"
#include "geoprove/numeric.hpp"

namespace geoprove {

enum class Kind : std::uint8_t { Point, Line, Circle, Angle, Ratio };

char kind_letter(Kind k);
std::optional<Kind> kind_from_letter(char c);
Kind kind_of(const NumValue& v);

/// Handle to an object of the logical core. Equality of handles is identity,
/// not knowledge; use CoreState::same() for equality up to merging.
struct Ref {
  std::uint32_t id = 0;
  Kind kind = Kind::Point;

  friend bool operator==(const Ref&, const Ref&) = default;
  friend auto operator<=>(const Ref& a, const Ref& b) { return a.id <=> b.id; }
};

class CoreError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};
class KindMismatch : public CoreError {
 public:
  using CoreError::CoreError;
};
class NumericMismatch : public CoreError {
 public:
  using CoreError::CoreError;
};
/// A deduced equality or equation contradicts the numerical model.
class InconsistencyDetected : public CoreError {
 public:
  using CoreError::CoreError;
};

struct Term {
  Rational coeff;
  Ref var;
};

struct LookupKey {
  std::string tool;
  std::vector<std::uint32_t> inputs;
  std::vector<Hyper> hyper;

  friend bool operator==(const LookupKey&, const LookupKey&) = default;
  friend auto operator<=>(const LookupKey&, const LookupKey&) = default;
};

enum class MergeReason { Explicit, Extensionality, Incidence, Direction, RatioSystem };
std::string to_string(MergeReason r);

struct MergeEvent {
  Ref kept;
  Ref absorbed;
  MergeReason reason;
};

class UnionFind {
 public:
  std::uint32_t add();
  std::uint32_t find(std::uint32_t x) const;
  /// Links the two classes; the smaller id becomes the representative.
  /// Returns the absorbed representative, or nothing when already joined.
  std::optional<std::uint32_t> unite(std::uint32_t a, std::uint32_t b);
  std::size_t size() const { return parent_.size(); }

 private:
  mutable std::vector<std::uint32_t> parent_;
};

// Table keys of the primitive tools the propagation rules read.
inline constexpr const char* kLiesOnLineKey = "lies_on(P,L)";
inline constexpr const char* kLiesOnCircleKey = "lies_on(P,C)";
inline constexpr const char* kDirectionKey = "prim__direction_of(L)";

class CoreState {
 public:
  explicit CoreState(Tolerances tol = {}) : tol_(tol) {}

  const Tolerances& tolerances() const { return tol_; }
  void set_tolerances(const Tolerances& tol) { tol_ = tol; }

  Ref add_object(NumValue value);
  Ref add_object(NumValue value, Kind kind);

  Ref find(Ref r) const;
  /// Canonical reference for a raw object id.
  Ref ref(std::uint32_t id) const;
  bool same(Ref a, Ref b) const { return find(a).id == find(b).id; }
  const NumValue& value(Ref r) const;
  template <class T>
  const T& value_as(Ref r) const {
    return std::get<T>(value(r));
  }
  std::size_t object_count() const { return objects_.size(); }
  /// All canonical representatives in id order.
  std::vector<Ref> canonical_objects() const;
  std::vector<Ref> class_members(Ref r) const;

  /// Asserts equality of two objects. Numerically distinct objects are
  /// rejected with NumericMismatch.
  void merge(Ref a, Ref b);
  void propagate();

  void angle_postulate(std::span<const Term> combo, const Rational& constant);
  bool angle_query(std::span<const Term> combo, const Rational& constant) const;
  void ratio_postulate(std::span<const Term> combo, const Rational& constant);
  bool ratio_query(std::span<const Term> combo, const Rational& constant) const;

  /// Numerical value of sum q_i x_i - c for an angle combination (mod 1
  /// deviation) or of sum q_i log x_i - log c for ratios.
  double angle_residual(std::span<const Term> combo, const Rational& constant) const;
  double ratio_residual(std::span<const Term> combo, const Rational& constant) const;

  std::optional<std::vector<Ref>> lookup_get(const std::string& tool, std::span<const Ref> inputs,
                                             std::span<const Hyper> hyper) const;
  void lookup_store(const std::string& tool, std::span<const Ref> inputs,
                    std::span<const Hyper> hyper, std::span<const Ref> outputs);

  bool has_incidence(Ref point, Ref curve) const;
  /// Canonical curves (lines or circles) with a known incidence for every
  /// given point.
  std::vector<Ref> curves_through(std::span<const Ref> points, Kind curve_kind) const;
  std::optional<Ref> direction_var(Ref line) const;

  const std::map<LookupKey, std::vector<Ref>>& table() const { return table_; }
  const AngleSystem& angles() const { return angles_; }
  const RatioSystem& ratios() const { return ratios_; }
  const std::vector<MergeEvent>& events() const { return events_; }

  /// Checks that every stored equation holds numerically; throws
  /// InconsistencyDetected otherwise.
  void check_rows_numerically() const;

 private:
  struct Object {
    NumValue value;
    Kind kind;
  };
  struct PendingMerge {
    Ref a;
    Ref b;
    MergeReason reason;
  };

  template <class F>
  void transaction(F&& body);

  void require_same_kind(Ref a, Ref b) const;
  AngleRow make_angle_row(std::span<const Term> combo, const Rational& constant) const;
  RatioRow make_ratio_row(std::span<const Term> combo, const Rational& constant) const;
  LookupKey make_key(const std::string& tool, std::span<const Ref> inputs,
                     std::span<const Hyper> hyper) const;

  void run_pump();
  bool unite(Ref a, Ref b, MergeReason reason);
  void canonicalize_table();
  void derive_equalities();
  void derive_incidence_merges(const std::map<std::uint32_t, std::vector<Ref>>& on_curve,
                               std::size_t needed);
  void derive_direction_merges(const std::map<std::uint32_t, std::vector<Ref>>& on_line);
  void derive_ratio_merges();

  Tolerances tol_;
  std::vector<Object> objects_;
  UnionFind uf_;
  AngleSystem angles_;
  RatioSystem ratios_;
  std::map<LookupKey, std::vector<Ref>> table_;
  std::deque<PendingMerge> pending_;
  bool table_dirty_ = false;
  std::vector<MergeEvent> events_;
};

}  // namespace geoprove
