#include "geoprove/numeric.hpp"

#include <cmath>
#include <numbers>

#include <fmt/format.h>

namespace geoprove {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

double direction_of_vector(double dx, double dy) {
  return reduce_angle(std::atan2(dy, dx) / std::numbers::pi);
}

double line_deviation(const LineVal& a, const LineVal& b, double scale) {
  // near-vertical lines may canonicalize to opposite normals
  double sign = (a.nx * b.nx + a.ny * b.ny) < 0 ? -1.0 : 1.0;
  double dn = std::hypot(a.nx - sign * b.nx, a.ny - sign * b.ny);
  double dc = std::abs(a.c - sign * b.c) / scale;
  return std::max(dn, dc);
}

}  // namespace

double reduce_angle(double v) {
  double r = v - std::floor(v);
  if (r >= 1.0) r = 0.0;
  return r;
}

double angle_deviation(double v) {
  double r = reduce_angle(v);
  return std::min(r, 1.0 - r);
}

LineVal make_line(double nx, double ny, double c) {
  double norm = std::hypot(nx, ny);
  if (!(norm > 0.0)) throw DegenerateInput("line with zero normal");
  nx /= norm;
  ny /= norm;
  c /= norm;
  if (nx < 0.0 || (nx == 0.0 && ny < 0.0)) {
    nx = -nx;
    ny = -ny;
    c = -c;
  }
  return {nx, ny, c};
}

LineVal line_through(const PointVal& p, const PointVal& q, const Tolerances& tol) {
  double dx = q.x - p.x;
  double dy = q.y - p.y;
  if (std::hypot(dx, dy) <= tol.exact_len())
    throw DegenerateInput("line through coincident points");
  LineVal l = make_line(-dy, dx, 0.0);
  l.c = l.nx * p.x + l.ny * p.y;
  return l;
}

CircleVal circumcircle_num(const PointVal& a, const PointVal& b, const PointVal& c,
                           const Tolerances& tol) {
  double area = signed_area(a, b, c);
  if (std::abs(area) <= tol.margin_area())
    throw DegenerateInput("circumcircle of a degenerate triangle");
  // Translate to a so the perpendicular-bisector system is well conditioned.
  double bx = b.x - a.x, by = b.y - a.y;
  double cx = c.x - a.x, cy = c.y - a.y;
  double d = 2.0 * (bx * cy - by * cx);
  double b2 = bx * bx + by * by;
  double c2 = cx * cx + cy * cy;
  double ux = (cy * b2 - by * c2) / d;
  double uy = (bx * c2 - cx * b2) / d;
  return {a.x + ux, a.y + uy, std::hypot(ux, uy)};
}

PointVal foot_num(const PointVal& p, const LineVal& l) {
  double off = l.nx * p.x + l.ny * p.y - l.c;
  return {p.x - off * l.nx, p.y - off * l.ny};
}

PointVal point_on_circle(double t, const CircleVal& c) {
  return {c.cx + c.r * std::cos(t), c.cy + c.r * std::sin(t)};
}

AngleNum direction_num(const LineVal& l) {
  return {direction_of_vector(l.ny, -l.nx)};
}

PointVal intersect_lines(const LineVal& l, const LineVal& m, const Tolerances& tol) {
  double det = l.nx * m.ny - l.ny * m.nx;
  if (std::abs(det) <= tol.eps_exact) throw DegenerateInput("intersection of parallel lines");
  return {(l.c * m.ny - l.ny * m.c) / det, (l.nx * m.c - l.c * m.nx) / det};
}

PointVal intersect_line_circle(const LineVal& l, const CircleVal& c, int side,
                               const Tolerances& tol) {
  PointVal f = foot_num({c.cx, c.cy}, l);
  double h = std::hypot(f.x - c.cx, f.y - c.cy);
  double s2 = c.r * c.r - h * h;
  if (c.r - h <= tol.exact_len() || s2 <= 0.0)
    throw DegenerateInput("line does not cross the circle");
  double s = std::sqrt(s2);
  double tx = l.ny, ty = -l.nx;
  double sign = side == 0 ? -1.0 : 1.0;
  return {f.x + sign * s * tx, f.y + sign * s * ty};
}

PointVal midpoint_num(const PointVal& a, const PointVal& b) {
  return {(a.x + b.x) / 2.0, (a.y + b.y) / 2.0};
}

double distance(const PointVal& a, const PointVal& b) { return std::hypot(a.x - b.x, a.y - b.y); }

double signed_area(const PointVal& a, const PointVal& b, const PointVal& c) {
  return 0.5 * ((b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x));
}

double angle_at(const PointVal& a, const PointVal& b, const PointVal& c) {
  return reduce_angle(direction_of_vector(c.x - b.x, c.y - b.y) -
                      direction_of_vector(a.x - b.x, a.y - b.y));
}

double exact_deviation(const NumFact& f, const Tolerances& tol) {
  return std::visit(
      overloaded{
          [&](const fact::PointEq& e) { return distance(e.p, e.q) / tol.scale; },
          [&](const fact::LiesOnLine& e) {
            return std::abs(e.l.nx * e.p.x + e.l.ny * e.p.y - e.l.c) / tol.scale;
          },
          [&](const fact::LiesOnCircle& e) {
            return std::abs(distance(e.p, {e.c.cx, e.c.cy}) - e.c.r) / tol.scale;
          },
          [&](const fact::AngleEq& e) { return angle_deviation(e.a.value - e.b.value); },
          [&](const fact::RatioEq& e) {
            return std::abs(std::log(e.a.value) - std::log(e.b.value));
          },
          [&](const fact::LineEq& e) { return line_deviation(e.a, e.b, tol.scale); },
          [&](const fact::CircleEq& e) {
            double dc = std::hypot(e.a.cx - e.b.cx, e.a.cy - e.b.cy);
            return std::max(dc, std::abs(e.a.r - e.b.r)) / tol.scale;
          },
      },
      f);
}

bool check_exact(const NumFact& f, const Tolerances& tol) {
  return exact_deviation(f, tol) <= tol.eps_exact;
}

bool check_margin(const CoexactFact& f, const Tolerances& tol) {
  return std::visit(
      overloaded{
          [&](const fact::NotEq& e) { return distance(e.p, e.q) > tol.margin_len(); },
          [&](const fact::NotOnLine& e) {
            return std::abs(e.l.nx * e.p.x + e.l.ny * e.p.y - e.l.c) > tol.margin_len();
          },
          [&](const fact::NotOnCircle& e) {
            return std::abs(distance(e.p, {e.c.cx, e.c.cy}) - e.c.r) > tol.margin_len();
          },
          [&](const fact::NotCollinear& e) {
            return std::abs(signed_area(e.a, e.b, e.c)) > tol.margin_area();
          },
          [&](const fact::OrientedAs& e) {
            return e.sign * signed_area(e.a, e.b, e.c) > tol.margin_area();
          },
      },
      f);
}

bool values_equal(const NumValue& a, const NumValue& b, const Tolerances& tol) {
  if (a.index() != b.index()) return false;
  NumFact f = std::visit(
      overloaded{
          [&](const PointVal& p) -> NumFact { return fact::PointEq{p, std::get<PointVal>(b)}; },
          [&](const LineVal& l) -> NumFact { return fact::LineEq{l, std::get<LineVal>(b)}; },
          [&](const CircleVal& c) -> NumFact {
            return fact::CircleEq{c, std::get<CircleVal>(b)};
          },
          [&](const AngleNum& x) -> NumFact { return fact::AngleEq{x, std::get<AngleNum>(b)}; },
          [&](const RatioNum& x) -> NumFact { return fact::RatioEq{x, std::get<RatioNum>(b)}; },
      },
      a);
  return check_exact(f, tol);
}

bool is_finite(const NumValue& v) {
  return std::visit(
      overloaded{
          [](const PointVal& p) { return std::isfinite(p.x) && std::isfinite(p.y); },
          [](const LineVal& l) {
            return std::isfinite(l.nx) && std::isfinite(l.ny) && std::isfinite(l.c);
          },
          [](const CircleVal& c) {
            return std::isfinite(c.cx) && std::isfinite(c.cy) && std::isfinite(c.r) && c.r > 0;
          },
          [](const AngleNum& a) { return std::isfinite(a.value); },
          [](const RatioNum& r) { return std::isfinite(r.value) && r.value > 0; },
      },
      v);
}

std::string describe(const NumValue& v) {
  return std::visit(
      overloaded{
          [](const PointVal& p) { return fmt::format("point({}, {})", p.x, p.y); },
          [](const LineVal& l) { return fmt::format("line({}, {}, {})", l.nx, l.ny, l.c); },
          [](const CircleVal& c) {
            return fmt::format("circle({}, {}, r={})", c.cx, c.cy, c.r);
          },
          [](const AngleNum& a) { return fmt::format("angle({})", a.value); },
          [](const RatioNum& r) { return fmt::format("ratio({})", r.value); },
      },
      v);
}

}  // namespace geoprove
