#include "geoprove/core.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include <fmt/format.h>

namespace geoprove {

char kind_letter(Kind k) {
  switch (k) {
    case Kind::Point: return 'P';
    case Kind::Line: return 'L';
    case Kind::Circle: return 'C';
    case Kind::Angle: return 'A';
    case Kind::Ratio: return 'D';
  }
  return '?';
}

std::optional<Kind> kind_from_letter(char c) {
  switch (c) {
    case 'P': return Kind::Point;
    case 'L': return Kind::Line;
    case 'C': return Kind::Circle;
    case 'A': return Kind::Angle;
    case 'D': return Kind::Ratio;
    default: return std::nullopt;
  }
}

Kind kind_of(const NumValue& v) { return static_cast<Kind>(v.index()); }

std::string to_string(MergeReason r) {
  switch (r) {
    case MergeReason::Explicit: return "explicit";
    case MergeReason::Extensionality: return "functional extensionality";
    case MergeReason::Incidence: return "common incident points";
    case MergeReason::Direction: return "equal direction through a common point";
    case MergeReason::RatioSystem: return "ratio equation system";
  }
  return "?";
}

std::string to_string(const Hyper& h) {
  switch (h.type) {
    case Hyper::Type::Int: return std::to_string(h.num);
    case Hyper::Type::Fraction: return fmt::format("{}/{}", h.num, h.den);
    case Hyper::Type::Float: {
      std::string s = fmt::format("{}", h.value);
      if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
      else if (s.find('.') == std::string::npos && s.find_first_of("eE") != std::string::npos)
        s.insert(s.find_first_of("eE"), ".0");
      return s;
    }
  }
  return "?";
}

// ---------------------------------------------------------------------------
// UnionFind

std::uint32_t UnionFind::add() {
  auto id = static_cast<std::uint32_t>(parent_.size());
  parent_.push_back(id);
  return id;
}

std::uint32_t UnionFind::find(std::uint32_t x) const {
  while (parent_[x] != x) {
    parent_[x] = parent_[parent_[x]];
    x = parent_[x];
  }
  return x;
}

std::optional<std::uint32_t> UnionFind::unite(std::uint32_t a, std::uint32_t b) {
  a = find(a);
  b = find(b);
  if (a == b) return std::nullopt;
  if (b < a) std::swap(a, b);
  parent_[b] = a;
  return b;
}

// ---------------------------------------------------------------------------
// CoreState

template <class F>
void CoreState::transaction(F&& body) {
  CoreState backup = *this;
  try {
    body();
  } catch (...) {
    *this = std::move(backup);
    throw;
  }
}

Ref CoreState::add_object(NumValue value) { return add_object(std::move(value), kind_of(value)); }

Ref CoreState::add_object(NumValue value, Kind kind) {
  if (kind_of(value) != kind)
    throw KindMismatch(fmt::format("value {} is not of kind {}", describe(value), kind_letter(kind)));
  if (!is_finite(value)) throw NumericMismatch("non-finite value " + describe(value));
  if (auto* a = std::get_if<AngleNum>(&value)) a->value = reduce_angle(a->value);
  std::uint32_t id = uf_.add();
  objects_.push_back({std::move(value), kind});
  return {id, kind};
}

Ref CoreState::find(Ref r) const { return {uf_.find(r.id), r.kind}; }

Ref CoreState::ref(std::uint32_t id) const { return {uf_.find(id), objects_.at(id).kind}; }

const NumValue& CoreState::value(Ref r) const { return objects_.at(uf_.find(r.id)).value; }

std::vector<Ref> CoreState::canonical_objects() const {
  std::vector<Ref> out;
  for (std::uint32_t i = 0; i < objects_.size(); ++i)
    if (uf_.find(i) == i) out.push_back({i, objects_[i].kind});
  return out;
}

std::vector<Ref> CoreState::class_members(Ref r) const {
  std::uint32_t root = uf_.find(r.id);
  std::vector<Ref> out;
  for (std::uint32_t i = 0; i < objects_.size(); ++i)
    if (uf_.find(i) == root) out.push_back({i, objects_[i].kind});
  return out;
}

void CoreState::require_same_kind(Ref a, Ref b) const {
  if (objects_.at(a.id).kind != objects_.at(b.id).kind)
    throw KindMismatch(fmt::format("cannot equate #{}:{} with #{}:{}", a.id,
                                   kind_letter(objects_[a.id].kind), b.id,
                                   kind_letter(objects_[b.id].kind)));
}

void CoreState::merge(Ref a, Ref b) {
  require_same_kind(a, b);
  if (same(a, b)) return;
  if (!values_equal(value(a), value(b), tol_))
    throw NumericMismatch(fmt::format("#{} = {} and #{} = {} differ numerically", a.id,
                                      describe(value(a)), b.id, describe(value(b))));
  transaction([&] {
    pending_.push_back({a, b, MergeReason::Explicit});
    run_pump();
  });
}

void CoreState::propagate() {
  transaction([&] { run_pump(); });
}

AngleRow CoreState::make_angle_row(std::span<const Term> combo, const Rational& constant) const {
  AngleRow row;
  for (const Term& t : combo) {
    if (objects_.at(t.var.id).kind != Kind::Angle)
      throw KindMismatch(fmt::format("#{} is not an angle", t.var.id));
    std::uint32_t v = uf_.find(t.var.id);
    Rational& slot = row.coeffs[v];
    slot += t.coeff;
    if (slot == 0) row.coeffs.erase(v);
  }
  row.constant = constant;
  return row;
}

RatioRow CoreState::make_ratio_row(std::span<const Term> combo, const Rational& constant) const {
  RatioRow row;
  for (const Term& t : combo) {
    if (objects_.at(t.var.id).kind != Kind::Ratio)
      throw KindMismatch(fmt::format("#{} is not a ratio", t.var.id));
    std::uint32_t v = uf_.find(t.var.id);
    Rational& slot = row.coeffs[v];
    slot += t.coeff;
    if (slot == 0) row.coeffs.erase(v);
  }
  if (constant <= 0) throw NumericMismatch("ratio constant must be positive");
  row.constant = factorize(constant);
  return row;
}

namespace {

double coeff_weight(const std::map<VarId, Rational>& coeffs) {
  double w = 1.0;
  for (const auto& [v, q] : coeffs) w += std::abs(to_double(q));
  return w;
}

}  // namespace

double CoreState::angle_residual(std::span<const Term> combo, const Rational& constant) const {
  double acc = -to_double(mod_one(constant));
  for (const Term& t : combo) acc += to_double(t.coeff) * value_as<AngleNum>(t.var).value;
  return angle_deviation(acc);
}

double CoreState::ratio_residual(std::span<const Term> combo, const Rational& constant) const {
  double acc = -std::log(to_double(constant));
  for (const Term& t : combo) acc += to_double(t.coeff) * std::log(value_as<RatioNum>(t.var).value);
  return std::abs(acc);
}

void CoreState::angle_postulate(std::span<const Term> combo, const Rational& constant) {
  AngleRow row = make_angle_row(combo, constant);
  double tol = tol_.eps_exact * coeff_weight(row.coeffs);
  double dev = angle_residual(combo, constant);
  if (dev > tol)
    throw NumericMismatch(fmt::format("angle equation off by {} half-turns", dev));
  transaction([&] {
    if (angles_.insert(std::move(row)) == InsertStatus::Contradiction)
      throw InconsistencyDetected("angle equation contradicts the known equations");
    run_pump();
  });
}

bool CoreState::angle_query(std::span<const Term> combo, const Rational& constant) const {
  return angles_.query(make_angle_row(combo, constant));
}

void CoreState::ratio_postulate(std::span<const Term> combo, const Rational& constant) {
  RatioRow row = make_ratio_row(combo, constant);
  double tol = tol_.eps_exact * coeff_weight(row.coeffs);
  double dev = ratio_residual(combo, constant);
  if (dev > tol) throw NumericMismatch(fmt::format("ratio equation off by {} (log)", dev));
  transaction([&] {
    if (ratios_.insert(std::move(row)) == InsertStatus::Contradiction)
      throw InconsistencyDetected("ratio equation contradicts the known equations");
    run_pump();
  });
}

bool CoreState::ratio_query(std::span<const Term> combo, const Rational& constant) const {
  return ratios_.query(make_ratio_row(combo, constant));
}

LookupKey CoreState::make_key(const std::string& tool, std::span<const Ref> inputs,
                              std::span<const Hyper> hyper) const {
  LookupKey key{tool, {}, {hyper.begin(), hyper.end()}};
  key.inputs.reserve(inputs.size());
  for (Ref r : inputs) key.inputs.push_back(uf_.find(r.id));
  return key;
}

std::optional<std::vector<Ref>> CoreState::lookup_get(const std::string& tool,
                                                      std::span<const Ref> inputs,
                                                      std::span<const Hyper> hyper) const {
  auto it = table_.find(make_key(tool, inputs, hyper));
  if (it == table_.end()) return std::nullopt;
  std::vector<Ref> out;
  for (Ref r : it->second) out.push_back(find(r));
  return out;
}

void CoreState::lookup_store(const std::string& tool, std::span<const Ref> inputs,
                             std::span<const Hyper> hyper, std::span<const Ref> outputs) {
  LookupKey key = make_key(tool, inputs, hyper);
  auto it = table_.find(key);
  if (it != table_.end() && it->second.size() != outputs.size())
    throw KindMismatch(fmt::format("{} stored with {} outputs, now {}", tool, it->second.size(),
                                   outputs.size()));
  if (it != table_.end())
    for (std::size_t i = 0; i < outputs.size(); ++i) require_same_kind(it->second[i], outputs[i]);
  transaction([&] {
    if (it != table_.end()) {
      for (std::size_t i = 0; i < outputs.size(); ++i)
        pending_.push_back({it->second[i], outputs[i], MergeReason::Extensionality});
    } else {
      std::vector<Ref> outs;
      for (Ref r : outputs) outs.push_back(find(r));
      table_.emplace(std::move(key), std::move(outs));
    }
    run_pump();
  });
}

bool CoreState::has_incidence(Ref point, Ref curve) const {
  const char* tool = curve.kind == Kind::Line ? kLiesOnLineKey : kLiesOnCircleKey;
  std::vector<Ref> in{point, curve};
  return lookup_get(tool, in, {}).has_value();
}

std::vector<Ref> CoreState::curves_through(std::span<const Ref> points, Kind curve_kind) const {
  const char* tool = curve_kind == Kind::Line ? kLiesOnLineKey : kLiesOnCircleKey;
  std::map<std::uint32_t, std::set<std::uint32_t>> on_curve;
  for (const auto& [key, outs] : table_)
    if (key.tool == tool) on_curve[uf_.find(key.inputs[1])].insert(uf_.find(key.inputs[0]));
  std::vector<Ref> out;
  for (const auto& [curve, pts] : on_curve) {
    bool all = std::all_of(points.begin(), points.end(),
                           [&](Ref p) { return pts.count(uf_.find(p.id)) > 0; });
    if (all) out.push_back({curve, curve_kind});
  }
  return out;
}

std::optional<Ref> CoreState::direction_var(Ref line) const {
  std::vector<Ref> in{line};
  auto hit = lookup_get(kDirectionKey, in, {});
  if (!hit) return std::nullopt;
  return hit->front();
}

// ---------------------------------------------------------------------------
// Propagation

void CoreState::run_pump() {
  for (;;) {
    while (!pending_.empty()) {
      PendingMerge m = pending_.front();
      pending_.pop_front();
      unite(m.a, m.b, m.reason);
    }
    canonicalize_table();
    if (!pending_.empty()) continue;
    derive_equalities();
    if (pending_.empty()) break;
  }
  check_rows_numerically();
}

bool CoreState::unite(Ref a, Ref b, MergeReason reason) {
  require_same_kind(a, b);
  Ref ra = find(a);
  Ref rb = find(b);
  if (ra.id == rb.id) return false;
  if (!values_equal(value(ra), value(rb), tol_))
    throw InconsistencyDetected(fmt::format("deduced equality of #{} and #{} ({}) fails numerically: "
                                            "{} vs {}",
                                            ra.id, rb.id, to_string(reason), describe(value(ra)),
                                            describe(value(rb))));
  std::uint32_t absorbed = *uf_.unite(ra.id, rb.id);
  std::uint32_t kept = uf_.find(ra.id);
  Kind k = objects_[kept].kind;
  if (k == Kind::Angle && angles_.rename(absorbed, kept) == InsertStatus::Contradiction)
    throw InconsistencyDetected("angle merge contradicts the angle equations");
  if (k == Kind::Ratio && ratios_.rename(absorbed, kept) == InsertStatus::Contradiction)
    throw InconsistencyDetected("ratio merge contradicts the ratio equations");
  table_dirty_ = true;
  events_.push_back({{kept, k}, {absorbed, k}, reason});
  return true;
}

void CoreState::canonicalize_table() {
  if (!table_dirty_) return;
  table_dirty_ = false;
  std::map<LookupKey, std::vector<Ref>> rebuilt;
  for (auto& [key, outs] : table_) {
    LookupKey k = key;
    for (auto& id : k.inputs) id = uf_.find(id);
    for (Ref& r : outs) r = find(r);
    auto [it, inserted] = rebuilt.emplace(std::move(k), outs);
    if (inserted) continue;
    for (std::size_t i = 0; i < outs.size() && i < it->second.size(); ++i)
      if (it->second[i].id != outs[i].id)
        pending_.push_back({it->second[i], outs[i], MergeReason::Extensionality});
  }
  table_ = std::move(rebuilt);
}

void CoreState::derive_equalities() {
  std::map<std::uint32_t, std::vector<Ref>> on_line;
  std::map<std::uint32_t, std::vector<Ref>> on_circle;
  for (const auto& [key, outs] : table_) {
    if (key.tool == kLiesOnLineKey)
      on_line[key.inputs[1]].push_back({key.inputs[0], Kind::Point});
    else if (key.tool == kLiesOnCircleKey)
      on_circle[key.inputs[1]].push_back({key.inputs[0], Kind::Point});
  }
  derive_incidence_merges(on_line, 2);
  derive_incidence_merges(on_circle, 3);
  derive_direction_merges(on_line);
  derive_ratio_merges();
}

void CoreState::derive_incidence_merges(
    const std::map<std::uint32_t, std::vector<Ref>>& on_curve, std::size_t needed) {
  // Two distinct lines share at most one point, two circles at most two.
  // The points must be apart by the coexact margin to count as distinct.
  for (auto i = on_curve.begin(); i != on_curve.end(); ++i) {
    std::set<std::uint32_t> first;
    for (Ref p : i->second) first.insert(p.id);
    for (auto j = std::next(i); j != on_curve.end(); ++j) {
      std::vector<PointVal> distinct;
      for (Ref p : j->second) {
        if (!first.count(p.id)) continue;
        const auto& pv = value_as<PointVal>(p);
        bool apart = std::all_of(distinct.begin(), distinct.end(), [&](const PointVal& q) {
          return distance(pv, q) > tol_.margin_len();
        });
        if (apart) distinct.push_back(pv);
      }
      if (distinct.size() >= needed) {
        Kind k = objects_[i->first].kind;
        pending_.push_back({{i->first, k}, {j->first, k}, MergeReason::Incidence});
      }
    }
  }
}

void CoreState::derive_direction_merges(const std::map<std::uint32_t, std::vector<Ref>>& on_line) {
  using FormKey = std::pair<std::map<VarId, Rational>, Rational>;
  std::map<FormKey, std::vector<std::uint32_t>> groups;
  for (const auto& [key, outs] : table_) {
    if (key.tool != kDirectionKey) continue;
    AngleRow form = angles_.normal_form(outs.front().id);
    groups[{form.coeffs, AngleTraits::canonical(form.constant)}].push_back(key.inputs[0]);
  }
  for (const auto& [form, lines] : groups) {
    for (std::size_t i = 0; i < lines.size(); ++i) {
      for (std::size_t j = i + 1; j < lines.size(); ++j) {
        auto li = on_line.find(lines[i]);
        auto lj = on_line.find(lines[j]);
        if (li == on_line.end() || lj == on_line.end()) continue;
        bool common = std::any_of(li->second.begin(), li->second.end(), [&](Ref p) {
          return std::any_of(lj->second.begin(), lj->second.end(),
                             [&](Ref q) { return q.id == p.id; });
        });
        if (common)
          pending_.push_back(
              {{lines[i], Kind::Line}, {lines[j], Kind::Line}, MergeReason::Direction});
      }
    }
  }
}

void CoreState::derive_ratio_merges() {
  using FormKey = std::pair<std::map<VarId, Rational>, PrimeExponents>;
  std::map<FormKey, std::uint32_t> first_seen;
  for (VarId v : ratios_.variables()) {
    RatioRow form = ratios_.normal_form(v);
    auto [it, inserted] = first_seen.emplace(FormKey{form.coeffs, form.constant}, v);
    if (!inserted)
      pending_.push_back({{it->second, Kind::Ratio}, {v, Kind::Ratio}, MergeReason::RatioSystem});
  }
}

void CoreState::check_rows_numerically() const {
  for (const auto& [pivot, row] : angles_.rows()) {
    double acc = -to_double(row.constant);
    for (const auto& [v, q] : row.coeffs)
      acc += to_double(q) * std::get<AngleNum>(objects_[v].value).value;
    double k = row.denom.convert_to<double>();
    if (angle_deviation(k * acc) > tol_.eps_exact * k * coeff_weight(row.coeffs))
      throw InconsistencyDetected(
          fmt::format("derived angle equation (pivot #{}) fails numerically by {}", pivot,
                      angle_deviation(k * acc)));
  }
  for (const auto& [pivot, row] : ratios_.rows()) {
    double acc = -log_value(row.constant);
    for (const auto& [v, q] : row.coeffs)
      acc += to_double(q) * std::log(std::get<RatioNum>(objects_[v].value).value);
    if (std::abs(acc) > tol_.eps_exact * coeff_weight(row.coeffs))
      throw InconsistencyDetected(
          fmt::format("derived ratio equation (pivot #{}) fails numerically by {}", pivot,
                      std::abs(acc)));
  }
}

}  // namespace geoprove
