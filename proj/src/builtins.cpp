#include "geoprove/builtins.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include <fmt/format.h>

namespace geoprove {

namespace {

using Refs = std::vector<Ref>;
using Hypers = std::span<const Hyper>;
using Inputs = std::span<const Ref>;

constexpr const char* kPrimLine = "prim__line(P,P)";
constexpr const char* kPrimCircle = "prim__circumcircle(P,P,P)";
constexpr const char* kDist = "dist(P,P)";

[[noreturn]] void fail(FailureReason r, const std::string& tool, const std::string& msg) {
  throw ToolFailure(r, tool, msg);
}

double wrap_half(double v) {
  double r = reduce_angle(v);
  return r > 0.5 ? r - 1.0 : r;
}

const PointVal& pt(CoreState& core, Ref r) { return core.value_as<PointVal>(r); }

template <class Make>
Ref memo_construct(CoreState& core, const std::string& key, const Refs& inputs,
                   const std::vector<Hyper>& hyper, Make make) {
  if (auto hit = core.lookup_get(key, inputs, hyper)) return hit->front();
  Ref r = core.add_object(make());
  core.lookup_store(key, inputs, hyper, Refs{r});
  return r;
}

void require_margin(CoreState& core, const std::string& tool, const CoexactFact& f,
                    const std::string& what) {
  if (!check_margin(f, core.tolerances()))
    fail(FailureReason::NumericMisfit, tool, "coexact margin not met: " + what);
}

void postulate_incidence(CoreState& core, Ref p, Ref curve) {
  const Tolerances& tol = core.tolerances();
  bool on = curve.kind == Kind::Line
                ? check_exact(fact::LiesOnLine{pt(core, p), core.value_as<LineVal>(curve)}, tol)
                : check_exact(fact::LiesOnCircle{pt(core, p), core.value_as<CircleVal>(curve)}, tol);
  if (!on) throw NumericMismatch(fmt::format("point #{} is not on #{}", p.id, curve.id));
  core.lookup_store(curve.kind == Kind::Line ? kLiesOnLineKey : kLiesOnCircleKey, Refs{p, curve},
                    {}, {});
}

/// Line through two points with both incidences recorded, as the `line`
/// axiom would produce it.
Ref line_of(CoreState& core, const std::string& tool, Ref a, Ref b) {
  require_margin(core, tool, fact::NotEq{pt(core, a), pt(core, b)},
                 fmt::format("points #{} and #{} too close for a line", a.id, b.id));
  const Tolerances tol = core.tolerances();
  Ref l = memo_construct(core, kPrimLine, {a, b}, {},
                         [&] { return line_through(pt(core, a), pt(core, b), tol); });
  core.lookup_store(kPrimLine, Refs{b, a}, {}, Refs{l});
  postulate_incidence(core, a, l);
  postulate_incidence(core, b, l);
  return l;
}

Ref direction_of(CoreState& core, Ref line) {
  return memo_construct(core, kDirectionKey, {line}, {},
                        [&] { return direction_num(core.value_as<LineVal>(line)); });
}

void store_permutations(CoreState& core, Ref a, Ref b, Ref c, Ref o) {
  std::array<Ref, 3> perm{a, b, c};
  std::sort(perm.begin(), perm.end(), [](Ref x, Ref y) { return x.id < y.id; });
  do {
    core.lookup_store(kPrimCircle, Refs{perm[0], perm[1], perm[2]}, {}, Refs{o});
  } while (std::next_permutation(perm.begin(), perm.end(),
                                 [](Ref x, Ref y) { return x.id < y.id; }));
}

Ref circle_of(CoreState& core, const std::string& tool, Ref a, Ref b, Ref c) {
  require_margin(core, tool, fact::NotCollinear{pt(core, a), pt(core, b), pt(core, c)},
                 "points too close to collinear for a circle");
  const Tolerances tol = core.tolerances();
  Ref o = memo_construct(core, kPrimCircle, {a, b, c}, {}, [&] {
    return circumcircle_num(pt(core, a), pt(core, b), pt(core, c), tol);
  });
  store_permutations(core, a, b, c, o);
  postulate_incidence(core, a, o);
  postulate_incidence(core, b, o);
  postulate_incidence(core, c, o);
  return o;
}

Ref dist_of(CoreState& core, Ref a, Ref b) {
  double d = distance(pt(core, a), pt(core, b));
  if (d <= core.tolerances().exact_len())
    throw DegenerateInput(fmt::format("distance of coincident points #{} and #{}", a.id, b.id));
  Ref r = memo_construct(core, kDist, {a, b}, {}, [&] { return RatioNum{d}; });
  core.lookup_store(kDist, Refs{b, a}, {}, Refs{r});
  return r;
}

/// Shared body of exact predicates: numeric fit first, then either a query
/// against the knowledge database (check mode) or a postulate.
template <class Query, class Postulate>
Refs exact_predicate(Executor& ex, Mode mode, const std::string& tool, double deviation,
                     Query&& query, Postulate&& postulate) {
  if (ex.witness_mode()) {
    ex.residual_sink()->residuals.push_back(deviation);
    return {};
  }
  CoreState& core = ex.core();
  if (std::abs(deviation) > core.tolerances().eps_exact)
    fail(FailureReason::NumericMisfit, tool,
         fmt::format("numerical data do not fit (deviation {:.3g})", deviation));
  if (mode == Mode::Check) {
    if (!query()) fail(FailureReason::UnknownFact, tool, "fact is not known");
    return {};
  }
  postulate();
  return {};
}

std::vector<Term> pairwise(Ref a, Ref b) { return {{Rational(1), a}, {Rational(-1), b}}; }

/// Angle at b from line ba to line bc as a combination of line directions.
std::vector<Term> angle_terms(CoreState& core, const std::string& tool, Ref a, Ref b, Ref c) {
  Ref from = direction_of(core, line_of(core, tool, b, a));
  Ref to = direction_of(core, line_of(core, tool, b, c));
  return {{Rational(1), to}, {Rational(-1), from}};
}

std::vector<Term> negate(std::vector<Term> t) {
  for (Term& x : t) x.coeff = -x.coeff;
  return t;
}

std::vector<Term> concat(std::vector<Term> a, const std::vector<Term>& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

// --- primitive tools -------------------------------------------------------

Refs free_point(Executor& ex, Inputs, Hypers h, Mode) {
  return {ex.core().add_object(PointVal{h[0].as_double(), h[1].as_double()})};
}

Refs prim_line(Executor& ex, Inputs in, Hypers, Mode) {
  CoreState& core = ex.core();
  LineVal l = line_through(pt(core, in[0]), pt(core, in[1]), core.tolerances());
  Ref r = core.add_object(l);
  core.lookup_store(kPrimLine, Refs{in[1], in[0]}, {}, Refs{r});
  return {r};
}

Refs prim_direction_of(Executor& ex, Inputs in, Hypers, Mode) {
  return {ex.core().add_object(direction_num(ex.core().value_as<LineVal>(in[0])))};
}

Refs prim_circumcircle(Executor& ex, Inputs in, Hypers, Mode) {
  CoreState& core = ex.core();
  Ref o = core.add_object(
      circumcircle_num(pt(core, in[0]), pt(core, in[1]), pt(core, in[2]), core.tolerances()));
  store_permutations(core, in[0], in[1], in[2], o);
  return {o};
}

Refs prim_foot(Executor& ex, Inputs in, Hypers, Mode) {
  CoreState& core = ex.core();
  return {core.add_object(foot_num(pt(core, in[0]), core.value_as<LineVal>(in[1])))};
}

Refs prim_m_point_on(Executor& ex, Inputs in, Hypers h, Mode) {
  CoreState& core = ex.core();
  return {core.add_object(point_on_circle(h[0].as_double(), core.value_as<CircleVal>(in[0])))};
}

Refs m_point_on(Executor& ex, Inputs in, Hypers h, Mode) {
  CoreState& core = ex.core();
  std::vector<Hyper> hv(h.begin(), h.end());
  Ref x = memo_construct(core, "prim__m_point_on(C)", {in[0]}, hv, [&] {
    return point_on_circle(h[0].as_double(), core.value_as<CircleVal>(in[0]));
  });
  postulate_incidence(core, x, in[0]);
  return {x};
}

Refs angle_compute(Executor& ex, Inputs in, Hypers h, Mode) {
  CoreState& core = ex.core();
  Rational constant = h[0].as_rational();
  double value = to_double(constant);
  std::vector<Term> terms;
  for (std::size_t i = 0; i < in.size(); ++i) {
    Rational q = h[i + 1].as_rational();
    value += to_double(q) * core.value_as<AngleNum>(in[i]).value;
    terms.push_back({-q, in[i]});
  }
  Ref alpha = core.add_object(AngleNum{reduce_angle(value)});
  terms.push_back({Rational(1), alpha});
  core.angle_postulate(terms, constant);
  return {alpha};
}

Refs lies_on(Executor& ex, Inputs in, Hypers, Mode mode) {
  CoreState& core = ex.core();
  const Tolerances& tol = core.tolerances();
  const PointVal& p = pt(core, in[0]);
  double dev;
  if (in[1].kind == Kind::Line) {
    const auto& l = core.value_as<LineVal>(in[1]);
    dev = (l.nx * p.x + l.ny * p.y - l.c) / tol.scale;
  } else {
    const auto& c = core.value_as<CircleVal>(in[1]);
    dev = (distance(p, {c.cx, c.cy}) - c.r) / tol.scale;
  }
  // The lookup table is the database for this predicate: a check-mode call
  // only succeeds through a memoized earlier postulate.
  return exact_predicate(ex, mode, "lies_on", dev, [] { return false; }, [] {});
}

Refs eq_angle_aa(Executor& ex, Inputs in, Hypers, Mode mode) {
  CoreState& core = ex.core();
  double dev = wrap_half(core.value_as<AngleNum>(in[0]).value - core.value_as<AngleNum>(in[1]).value);
  auto terms = pairwise(in[0], in[1]);
  return exact_predicate(
      ex, mode, "eq_angle", dev, [&] { return core.angle_query(terms, 0); },
      [&] { core.angle_postulate(terms, 0); });
}

Refs eq_angle_points(Executor& ex, Inputs in, Hypers, Mode mode) {
  CoreState& core = ex.core();
  double dev = wrap_half(angle_at(pt(core, in[0]), pt(core, in[1]), pt(core, in[2])) -
                         angle_at(pt(core, in[3]), pt(core, in[4]), pt(core, in[5])));
  auto terms = [&] {
    return concat(angle_terms(core, "eq_angle", in[0], in[1], in[2]),
                  negate(angle_terms(core, "eq_angle", in[3], in[4], in[5])));
  };
  return exact_predicate(
      ex, mode, "eq_angle", dev, [&] { return core.angle_query(terms(), 0); },
      [&] { core.angle_postulate(terms(), 0); });
}

Refs eq_dist_dd(Executor& ex, Inputs in, Hypers, Mode mode) {
  CoreState& core = ex.core();
  double dev = std::log(core.value_as<RatioNum>(in[0]).value) -
               std::log(core.value_as<RatioNum>(in[1]).value);
  auto terms = pairwise(in[0], in[1]);
  return exact_predicate(
      ex, mode, "eq_dist", dev, [&] { return core.ratio_query(terms, 1); },
      [&] { core.ratio_postulate(terms, 1); });
}

Refs eq_dist_points(Executor& ex, Inputs in, Hypers, Mode mode) {
  CoreState& core = ex.core();
  double ab = distance(pt(core, in[0]), pt(core, in[1]));
  double cd = distance(pt(core, in[2]), pt(core, in[3]));
  if (ab <= core.tolerances().exact_len() || cd <= core.tolerances().exact_len())
    throw DegenerateInput("eq_dist of coincident points");
  auto terms = [&] {
    return pairwise(dist_of(core, in[0], in[1]), dist_of(core, in[2], in[3]));
  };
  return exact_predicate(
      ex, mode, "eq_dist", std::log(ab) - std::log(cd),
      [&] { return core.ratio_query(terms(), 1); }, [&] { core.ratio_postulate(terms(), 1); });
}

/// a/b = c/d as log a - log b - log c + log d = 0.
std::vector<Term> ratio_terms(Ref a, Ref b, Ref c, Ref d) {
  return {{Rational(1), a}, {Rational(-1), b}, {Rational(-1), c}, {Rational(1), d}};
}

Refs eq_ratio_dd(Executor& ex, Inputs in, Hypers, Mode mode) {
  CoreState& core = ex.core();
  auto lv = [&](int i) { return std::log(core.value_as<RatioNum>(in[i]).value); };
  double dev = lv(0) - lv(1) - lv(2) + lv(3);
  auto terms = ratio_terms(in[0], in[1], in[2], in[3]);
  return exact_predicate(
      ex, mode, "eq_ratio", dev, [&] { return core.ratio_query(terms, 1); },
      [&] { core.ratio_postulate(terms, 1); });
}

Refs eq_ratio_points(Executor& ex, Inputs in, Hypers, Mode mode) {
  CoreState& core = ex.core();
  std::array<double, 4> len{};
  for (int i = 0; i < 4; ++i) {
    len[i] = distance(pt(core, in[2 * i]), pt(core, in[2 * i + 1]));
    if (len[i] <= core.tolerances().exact_len())
      throw DegenerateInput("eq_ratio of coincident points");
  }
  double dev = std::log(len[0]) - std::log(len[1]) - std::log(len[2]) + std::log(len[3]);
  auto terms = [&] {
    return ratio_terms(dist_of(core, in[0], in[1]), dist_of(core, in[2], in[3]),
                       dist_of(core, in[4], in[5]), dist_of(core, in[6], in[7]));
  };
  return exact_predicate(
      ex, mode, "eq_ratio", dev, [&] { return core.ratio_query(terms(), 1); },
      [&] { core.ratio_postulate(terms(), 1); });
}

Refs dist(Executor& ex, Inputs in, Hypers, Mode) {
  CoreState& core = ex.core();
  double d = distance(pt(core, in[0]), pt(core, in[1]));
  if (d <= core.tolerances().exact_len()) throw DegenerateInput("distance of coincident points");
  Ref r = core.add_object(RatioNum{d});
  core.lookup_store(kDist, Refs{in[1], in[0]}, {}, Refs{r});
  return {r};
}

Refs not_eq_tool(Executor& ex, Inputs in, Hypers, Mode) {
  CoreState& core = ex.core();
  require_margin(core, "not_eq", fact::NotEq{pt(core, in[0]), pt(core, in[1])},
                 "points are too close");
  return {};
}

Refs not_on(Executor& ex, Inputs in, Hypers, Mode) {
  CoreState& core = ex.core();
  if (in[1].kind == Kind::Line)
    require_margin(core, "not_on", fact::NotOnLine{pt(core, in[0]), core.value_as<LineVal>(in[1])},
                   "point is too close to the line");
  else
    require_margin(core, "not_on",
                   fact::NotOnCircle{pt(core, in[0]), core.value_as<CircleVal>(in[1])},
                   "point is too close to the circle");
  return {};
}

Refs not_collinear(Executor& ex, Inputs in, Hypers, Mode) {
  CoreState& core = ex.core();
  require_margin(core, "not_collinear",
                 fact::NotCollinear{pt(core, in[0]), pt(core, in[1]), pt(core, in[2])},
                 "points are too close to collinear");
  return {};
}

Refs concyclic(Executor& ex, Inputs in, Hypers, Mode mode) {
  CoreState& core = ex.core();
  // Measure against the circle through the best-conditioned triple.
  std::array<int, 4> idx{0, 1, 2, 3};
  std::array<std::array<int, 4>, 4> triples{{{0, 1, 2, 3}, {0, 1, 3, 2}, {0, 2, 3, 1}, {1, 2, 3, 0}}};
  double best = -1.0;
  for (const auto& t : triples) {
    double area = std::abs(signed_area(pt(core, in[t[0]]), pt(core, in[t[1]]), pt(core, in[t[2]])));
    if (area > best) {
      best = area;
      idx = t;
    }
  }
  CircleVal c = circumcircle_num(pt(core, in[idx[0]]), pt(core, in[idx[1]]), pt(core, in[idx[2]]),
                                 core.tolerances());
  double dev = (distance(pt(core, in[idx[3]]), {c.cx, c.cy}) - c.r) / core.tolerances().scale;
  return exact_predicate(
      ex, mode, "concyclic", dev,
      [&] { return !core.curves_through(in, Kind::Circle).empty(); },
      [&] {
        Ref o = circle_of(core, "concyclic", in[idx[0]], in[idx[1]], in[idx[2]]);
        postulate_incidence(core, in[idx[3]], o);
      });
}

Refs intersection_ll(Executor& ex, Inputs in, Hypers, Mode) {
  CoreState& core = ex.core();
  PointVal p = intersect_lines(core.value_as<LineVal>(in[0]), core.value_as<LineVal>(in[1]),
                               core.tolerances());
  Ref x = core.add_object(p);
  postulate_incidence(core, x, in[0]);
  postulate_incidence(core, x, in[1]);
  return {x};
}

Refs intersection_lc(Executor& ex, Inputs in, Hypers h, Mode) {
  CoreState& core = ex.core();
  int side = static_cast<int>(h[0].num);
  if (side != 0 && side != 1)
    fail(FailureReason::Degenerate, "intersection", "side selector must be 0 or 1");
  PointVal p = intersect_line_circle(core.value_as<LineVal>(in[0]), core.value_as<CircleVal>(in[1]),
                                     side, core.tolerances());
  Ref x = core.add_object(p);
  postulate_incidence(core, x, in[0]);
  postulate_incidence(core, x, in[1]);
  return {x};
}

Refs midpoint(Executor& ex, Inputs in, Hypers, Mode) {
  CoreState& core = ex.core();
  Ref l = line_of(core, "midpoint", in[0], in[1]);
  Ref m = core.add_object(midpoint_num(pt(core, in[0]), pt(core, in[1])));
  postulate_incidence(core, m, l);
  core.ratio_postulate(pairwise(dist_of(core, in[0], m), dist_of(core, m, in[1])), 1);
  return {m};
}

ToolSignature sig(std::string name, std::vector<Kind> in, std::vector<Kind> out,
                  std::vector<HyperSlot> hyper = {}, bool variadic = false) {
  return {std::move(name), std::move(in), std::move(out), std::move(hyper), variadic};
}

}  // namespace

void register_builtins(Registry& registry) {
  using K = Kind;
  using H = HyperSlot;
  const K P = K::Point, L = K::Line, C = K::Circle, A = K::Angle, D = K::Ratio;
  auto add = [&](ToolSignature s, bool memo, BuiltinFn fn) {
    registry.add(std::make_shared<Tool>(std::move(s), memo, std::move(fn)));
  };

  add(sig("free_point", {}, {P}, {H::Float, H::Float}), false, free_point);
  add(sig("prim__line", {P, P}, {L}), true, prim_line);
  add(sig("prim__direction_of", {L}, {A}), true, prim_direction_of);
  add(sig("prim__circumcircle", {P, P, P}, {C}), true, prim_circumcircle);
  add(sig("prim__foot", {P, L}, {P}), true, prim_foot);
  add(sig("prim__m_point_on", {C}, {P}, {H::Float}), true, prim_m_point_on);
  add(sig("m_point_on", {C}, {P}, {H::Float}), true, m_point_on);
  add(sig("angle_compute", {A}, {A}, {H::Fraction, H::Fraction}, true), true, angle_compute);

  add(sig("lies_on", {P, L}, {}), true, lies_on);
  add(sig("lies_on", {P, C}, {}), true, lies_on);
  add(sig("eq_angle", {A, A}, {}), true, eq_angle_aa);
  add(sig("eq_angle", {P, P, P, P, P, P}, {}), true, eq_angle_points);
  add(sig("eq_dist", {D, D}, {}), true, eq_dist_dd);
  add(sig("eq_dist", {P, P, P, P}, {}), true, eq_dist_points);
  add(sig("eq_ratio", {D, D, D, D}, {}), true, eq_ratio_dd);
  add(sig("eq_ratio", {P, P, P, P, P, P, P, P}, {}), true, eq_ratio_points);
  add(sig("concyclic", {P, P, P, P}, {}), false, concyclic);

  add(sig("not_eq", {P, P}, {}), false, not_eq_tool);
  add(sig("not_on", {P, L}, {}), false, not_on);
  add(sig("not_on", {P, C}, {}), false, not_on);
  add(sig("not_collinear", {P, P, P}, {}), false, not_collinear);

  add(sig("dist", {P, P}, {D}), true, dist);
  add(sig("intersection", {L, L}, {P}), true, intersection_ll);
  add(sig("intersection", {L, C}, {P}, {H::Int}), true, intersection_lc);
  add(sig("midpoint", {P, P}, {P}), true, midpoint);
}

std::shared_ptr<const Registry> builtin_registry() {
  static const std::shared_ptr<const Registry> reg = [] {
    auto r = std::make_shared<Registry>();
    register_builtins(*r);
    return r;
  }();
  return reg;
}

}  // namespace geoprove
