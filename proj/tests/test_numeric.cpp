#include <doctest.h>

#include <cmath>
#include <random>

#include "geoprove/numeric.hpp"
#include "support.hpp"

using namespace geoprove;
using namespace testsupport;

namespace {

const Tolerances kUnit{};

/// Unit normal of the line through p and q, sign fixed so the first nonzero
/// component is positive, computed in long double.
LineVal oracle_line(PointVal p, PointVal q) {
  long double dx = static_cast<long double>(q.x) - p.x;
  long double dy = static_cast<long double>(q.y) - p.y;
  long double len = std::sqrt(dx * dx + dy * dy);
  long double nx = dy / len, ny = -dx / len;
  if (nx < 0 || (nx == 0 && ny < 0)) nx = -nx, ny = -ny;
  return {static_cast<double>(nx), static_cast<double>(ny), static_cast<double>(nx * p.x + ny * p.y)};
}

/// Circumcenter from the two perpendicular-bisector equations, Cramer's rule.
CircleVal oracle_circle(PointVal a, PointVal b, PointVal c) {
  long double a1 = 2.0L * (b.x - a.x), b1 = 2.0L * (b.y - a.y);
  long double c1 = (long double)b.x * b.x + (long double)b.y * b.y - (long double)a.x * a.x -
                   (long double)a.y * a.y;
  long double a2 = 2.0L * (c.x - a.x), b2 = 2.0L * (c.y - a.y);
  long double c2 = (long double)c.x * c.x + (long double)c.y * c.y - (long double)a.x * a.x -
                   (long double)a.y * a.y;
  long double det = a1 * b2 - a2 * b1;
  long double x = (c1 * b2 - c2 * b1) / det, y = (a1 * c2 - a2 * c1) / det;
  long double r = std::sqrt((x - a.x) * (x - a.x) + (y - a.y) * (y - a.y));
  return {static_cast<double>(x), static_cast<double>(y), static_cast<double>(r)};
}

/// Orthogonal projection of p onto the line through u and v.
PointVal oracle_foot(PointVal p, PointVal u, PointVal v) {
  long double dx = v.x - u.x, dy = v.y - u.y;
  long double t = ((p.x - u.x) * dx + (p.y - u.y) * dy) / (dx * dx + dy * dy);
  return {static_cast<double>(u.x + t * dx), static_cast<double>(u.y + t * dy)};
}

double det3(PointVal a, PointVal b, PointVal c) {
  return a.x * b.y + b.x * c.y + c.x * a.y - a.y * b.x - b.y * c.x - c.y * a.x;
}

const PointVal A{kAx, kAy}, B{kBx, kBy}, C{kCx, kCy};

}  // namespace

TEST_CASE("line_through") {
  LineVal x_axis = line_through({0, 0}, {1, 0}, kUnit);
  CHECK(x_axis.nx == doctest::Approx(0.0));
  CHECK(x_axis.ny == doctest::Approx(1.0));
  CHECK(x_axis.c == doctest::Approx(0.0));
  CHECK_THROWS_AS(line_through({0, 0}, {0, 0}, kUnit), DegenerateInput);

  LineVal l = line_through(A, B, kUnit);
  LineVal o = oracle_line(A, B);
  CHECK(l.nx == doctest::Approx(o.nx).epsilon(1e-12));
  CHECK(l.ny == doctest::Approx(o.ny).epsilon(1e-12));
  CHECK(l.c == doctest::Approx(o.c).epsilon(1e-12));
  // Normal is proportional to (By - Ay, Ax - Bx) = (143.00946..., 47.76294...).
  CHECK(l.nx / l.ny == doctest::Approx((kBy - kAy) / (kAx - kBx)).epsilon(1e-12));
}

TEST_CASE("line normal is unit and canonical") {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> u(-100, 100);
  for (int i = 0; i < 500; ++i) {
    PointVal p{u(rng), u(rng)}, q{u(rng), u(rng)};
    LineVal l = line_through(p, q, kUnit);
    CHECK(std::abs(l.nx * l.nx + l.ny * l.ny - 1.0) <= 1e-12);
    CHECK((l.nx > 0 || (l.nx == 0 && l.ny > 0)));
    CHECK(direction_num(l).value == direction_num(line_through(q, p, kUnit)).value);
  }
}

TEST_CASE("circumcircle_num") {
  CircleVal c = circumcircle_num({0, 0}, {2, 0}, {0, 2}, kUnit);
  CHECK(c.cx == doctest::Approx(1.0));
  CHECK(c.cy == doctest::Approx(1.0));
  CHECK(c.r == doctest::Approx(std::sqrt(2.0)));
  CHECK_THROWS_AS(circumcircle_num({0, 0}, {1, 0}, {2, 0}, kUnit), DegenerateInput);

  CircleVal got = circumcircle_num(A, B, C, kUnit);
  CircleVal want = oracle_circle(A, B, C);
  CHECK(got.cx == doctest::Approx(want.cx).epsilon(1e-10));
  CHECK(got.cy == doctest::Approx(want.cy).epsilon(1e-10));
  CHECK(got.r == doctest::Approx(want.r).epsilon(1e-10));
}

TEST_CASE("foot_num") {
  LineVal x_axis = make_line(0, 1, 0);
  PointVal f = foot_num({3, 5}, x_axis);
  CHECK(f.x == doctest::Approx(3.0));
  CHECK(f.y == doctest::Approx(0.0));
  PointVal on = foot_num({3, 0}, x_axis);
  CHECK(on.x == doctest::Approx(3.0));

  LineVal diag = line_through({1, 0}, {0, 1}, kUnit);
  PointVal g = foot_num({0, 0}, diag);
  CHECK(g.x == doctest::Approx(0.5));
  CHECK(g.y == doctest::Approx(0.5));

  std::mt19937 rng(11);
  std::uniform_real_distribution<double> u(-50, 50);
  for (int i = 0; i < 200; ++i) {
    PointVal p{u(rng), u(rng)}, s{u(rng), u(rng)}, t{u(rng), u(rng)};
    LineVal l = line_through(s, t, kUnit);
    PointVal once = foot_num(p, l), twice = foot_num(once, l);
    PointVal want = oracle_foot(p, s, t);
    CHECK(distance(once, want) <= 1e-9);
    CHECK(distance(once, twice) <= kUnit.eps_exact);
  }
}

TEST_CASE("point_on_circle") {
  CircleVal unit{0, 0, 1};
  PointVal p0 = point_on_circle(0, unit);
  CHECK(p0.x == doctest::Approx(1.0));
  CHECK(p0.y == doctest::Approx(0.0));
  PointVal pi = point_on_circle(M_PI, unit);
  CHECK(pi.x == doctest::Approx(-1.0));
  CHECK(std::abs(pi.y) < 1e-12);

  CircleVal o = oracle_circle(A, B, C);
  PointVal x = point_on_circle(kXParam, circumcircle_num(A, B, C, kUnit));
  CHECK(x.x == doctest::Approx(o.cx + o.r * std::cos(kXParam)).epsilon(1e-10));
  CHECK(x.y == doctest::Approx(o.cy + o.r * std::sin(kXParam)).epsilon(1e-10));
  CHECK(check_exact(fact::LiesOnCircle{x, circumcircle_num(A, B, C, kUnit)}, kUnit));
}

TEST_CASE("direction_num") {
  CHECK(direction_num(line_through({0, 0}, {1, 0}, kUnit)).value == doctest::Approx(0.0));
  CHECK(direction_num(line_through({0, 0}, {1, 1}, kUnit)).value == doctest::Approx(0.25));
  CHECK(direction_num(line_through({0, 0}, {-1, 1}, kUnit)).value == doctest::Approx(0.75));
}

TEST_CASE("check_exact and check_margin") {
  CHECK(check_exact(fact::LiesOnLine{{3, 0}, make_line(0, 1, 0)}, kUnit));
  CHECK_FALSE(check_exact(fact::PointEq{{0, 0}, {1, 0}}, kUnit));
  CHECK(check_margin(fact::NotEq{{0, 0}, {1, 0}}, kUnit));
  CHECK_FALSE(check_margin(fact::NotCollinear{{0, 0}, {1, 0}, {2, 1e-9}}, kUnit));

  Tolerances tol{1e-7, 1e-4, 300.0};
  CHECK(check_margin(fact::NotCollinear{A, B, C}, tol));
  CHECK(std::abs(det3(A, B, C)) / 2 > tol.margin_area());

  // The feet from X onto CA and BC lie on the circle with diameter CX.
  PointVal x = point_on_circle(kXParam, oracle_circle(A, B, C));
  PointVal fa = oracle_foot(x, B, C), fb = oracle_foot(x, C, A);
  CHECK(check_exact(fact::LiesOnCircle{fb, circumcircle_num(C, x, fa, tol)}, tol));
}

TEST_CASE("exact and margin checks are never both true") {
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> u(-1, 1);
  std::uniform_real_distribution<double> tiny(-3e-4, 3e-4);
  for (int i = 0; i < 2000; ++i) {
    PointVal p{u(rng), u(rng)};
    PointVal q{p.x + tiny(rng), p.y + tiny(rng)};
    CHECK_FALSE((check_exact(fact::PointEq{p, q}, kUnit) && check_margin(fact::NotEq{p, q}, kUnit)));
    LineVal l = line_through({u(rng), u(rng)}, {u(rng) + 3, u(rng)}, kUnit);
    PointVal near = foot_num(p, l);
    near.x += tiny(rng) * l.nx;
    near.y += tiny(rng) * l.ny;
    CHECK_FALSE((check_exact(fact::LiesOnLine{near, l}, kUnit) &&
                 check_margin(fact::NotOnLine{near, l}, kUnit)));
  }
}
