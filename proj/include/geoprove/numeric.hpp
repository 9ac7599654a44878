#pragma once

// Numerical model: coordinates of the constructed objects, constructions on
// them, and the two families of numeric predicate checks (tolerance-based
// exact checks and margin-based coexact checks).

#include <stdexcept>
#include <string>
#include <variant>

namespace geoprove {

/// Raised by constructions whose inputs are degenerate (coincident points,
/// collinear triangle, parallel lines, ...).
class DegenerateInput : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct PointVal {
  double x = 0.0;
  double y = 0.0;
};

/// Line nx*x + ny*y = c with a unit normal. The normal is canonicalized so
/// that its first nonzero component is positive.
struct LineVal {
  double nx = 0.0;
  double ny = 1.0;
  double c = 0.0;
};

struct CircleVal {
  double cx = 0.0;
  double cy = 0.0;
  double r = 1.0;
};

/// Angle in half-turn units (1.0 is pi), reduced into [0, 1).
struct AngleNum {
  double value = 0.0;
};

struct RatioNum {
  double value = 1.0;
};

using NumValue = std::variant<PointVal, LineVal, CircleVal, AngleNum, RatioNum>;

struct Tolerances {
  double eps_exact = 1e-7;
  double margin_coexact = 1e-4;
  double scale = 1.0;

  double exact_len() const { return eps_exact * scale; }
  double margin_len() const { return margin_coexact * scale; }
  double margin_area() const { return margin_coexact * scale * scale; }
};

/// Reduce a half-turn value into [0, 1).
double reduce_angle(double v);
/// Distance of v from the nearest integer, i.e. |v| measured mod 1.
double angle_deviation(double v);

LineVal make_line(double nx, double ny, double c);

LineVal line_through(const PointVal& p, const PointVal& q, const Tolerances& tol);
CircleVal circumcircle_num(const PointVal& a, const PointVal& b, const PointVal& c,
                           const Tolerances& tol);
PointVal foot_num(const PointVal& p, const LineVal& l);
PointVal point_on_circle(double t, const CircleVal& c);
AngleNum direction_num(const LineVal& l);
PointVal intersect_lines(const LineVal& l, const LineVal& m, const Tolerances& tol);
/// `side` selects one of the two solutions (0 or 1), ordered along the
/// line's tangent direction.
PointVal intersect_line_circle(const LineVal& l, const CircleVal& c, int side,
                               const Tolerances& tol);
PointVal midpoint_num(const PointVal& a, const PointVal& b);
double distance(const PointVal& a, const PointVal& b);
/// Signed area of the triangle abc (positive when counterclockwise).
double signed_area(const PointVal& a, const PointVal& b, const PointVal& c);
/// Oriented full angle at b from ray ba to ray bc, mod 1 in half-turns.
double angle_at(const PointVal& a, const PointVal& b, const PointVal& c);

namespace fact {
struct PointEq { PointVal p, q; };
struct LiesOnLine { PointVal p; LineVal l; };
struct LiesOnCircle { PointVal p; CircleVal c; };
struct AngleEq { AngleNum a, b; };
struct RatioEq { RatioNum a, b; };
struct LineEq { LineVal a, b; };
struct CircleEq { CircleVal a, b; };

struct NotEq { PointVal p, q; };
struct NotOnLine { PointVal p; LineVal l; };
struct NotOnCircle { PointVal p; CircleVal c; };
struct NotCollinear { PointVal a, b, c; };
/// sign = +1 for counterclockwise, -1 for clockwise.
struct OrientedAs { PointVal a, b, c; int sign; };
}  // namespace fact

using NumFact = std::variant<fact::PointEq, fact::LiesOnLine, fact::LiesOnCircle, fact::AngleEq,
                             fact::RatioEq, fact::LineEq, fact::CircleEq>;
using CoexactFact = std::variant<fact::NotEq, fact::NotOnLine, fact::NotOnCircle,
                                 fact::NotCollinear, fact::OrientedAs>;

/// Deviation of an exact fact, compared against eps_exact: lengths are
/// divided by the session scale, angles are in half-turns, ratios in log space.
double exact_deviation(const NumFact& f, const Tolerances& tol);
bool check_exact(const NumFact& f, const Tolerances& tol);
bool check_margin(const CoexactFact& f, const Tolerances& tol);

/// Numeric equality of two values of the same alternative.
bool values_equal(const NumValue& a, const NumValue& b, const Tolerances& tol);
bool is_finite(const NumValue& v);
std::string describe(const NumValue& v);

}  // namespace geoprove
