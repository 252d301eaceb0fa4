#pragma once

#include <Eigen/Dense>

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "curvem/errors.hpp"

namespace curvem {

using Vec2 = Eigen::Vector2d;

/// Rotate a vector by -pi/2: the intrinsic edge normal is the tangent
/// rotated clockwise, so it points outward along counterclockwise loops.
inline Vec2 rotate_cw(const Vec2& v) { return Vec2(v.y(), -v.x()); }

struct Interval {
    double a = 0.0;
    double b = 0.0;
    double length() const { return b - a; }
    double midpoint() const { return 0.5 * (a + b); }
};

enum class CurveKind { AffineSegment, CircleArc, AnalyticGraph, Composite };

/// A regular parametric map gamma: [a,b] -> R^2 with derivative.
/// Analytic kinds carry their defining parameters so meshes referencing
/// them can be written to and read back from files; `generic` graph
/// curves built from std::function are usable programmatically only.
class ParametricCurve {
public:
    CurveKind kind = CurveKind::AnalyticGraph;
    Interval param_interval;

    std::function<Vec2(double)> eval;
    std::function<Vec2(double)> deriv;

    // Serialization payload, meaning depends on kind:
    //   AffineSegment : x0 y0 x1 y1              gamma(t) = p0 + t*(p1-p0)/|p1-p0|
    //   CircleArc     : cx cy r                  gamma(t) = c + r(cos t, sin t)
    //   AnalyticGraph : poly c0..cn   (subkind "poly")   y = sum c_i x^i
    //                   sin  a w phi b (subkind "sin")   y = a sin(w x + phi) + b
    //   empty         : programmatic curve, not serializable
    std::string subkind;
    std::vector<double> params;

    bool serializable() const { return !subkind.empty() || kind != CurveKind::AnalyticGraph; }
};

ParametricCurve make_segment_curve(const Vec2& p0, const Vec2& p1);
ParametricCurve make_circle_curve(const Vec2& center, double radius,
                                  double t0 = 0.0, double t1 = 2.0 * EIGEN_PI);
ParametricCurve make_poly_graph_curve(std::vector<double> coeffs, double x0, double x1);
ParametricCurve make_sin_graph_curve(double a, double w, double phi, double b,
                                     double x0, double x1);
ParametricCurve make_graph_curve(std::function<double(double)> g,
                                 std::function<double(double)> dg,
                                 double x0, double x1);
/// Concatenation of curves; parameter runs through the pieces' intervals
/// laid end to end.
ParametricCurve make_composite_curve(std::vector<ParametricCurve> pieces);

/// Geometry of a single mesh edge. Every edge exposes an intrinsic
/// parametrization over param(): increasing parameter runs from the first
/// endpoint to the second, and the intrinsic normal is the tangent rotated
/// by -pi/2. Curved edges reference a sub-interval [t0,t1] of a shared
/// curve; orientation -1 means the edge runs against the curve parameter,
/// which is absorbed by re-parametrizing over [-t1,-t0].
class EdgeGeom {
public:
    static EdgeGeom straight(const Vec2& p0, const Vec2& p1);
    static EdgeGeom curved(std::shared_ptr<const ParametricCurve> curve,
                           double t0, double t1, int orientation);

    bool is_straight() const { return !curve_; }
    Interval param() const { return param_; }

    Vec2 eval(double t) const;
    Vec2 deriv(double t) const;

    Vec2 start() const { return eval(param_.a); }
    Vec2 end() const { return eval(param_.b); }

    const std::shared_ptr<const ParametricCurve>& curve() const { return curve_; }
    double curve_t0() const { return t0_; }
    double curve_t1() const { return t1_; }
    int orientation() const { return orient_; }

private:
    std::shared_ptr<const ParametricCurve> curve_;  // null for straight
    Vec2 p0_ = Vec2::Zero(), p1_ = Vec2::Zero();
    double t0_ = 0.0, t1_ = 0.0;
    int orient_ = 1;
    Interval param_;
};

/// Gauss-Legendre rule on [-1,1]; nodes/weights cached per point count.
struct QuadratureRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

const QuadratureRule& gauss_legendre(int n);

/// point, unit tangent, unit normal (tangent rotated by -pi/2), speed
struct EdgeFrame {
    Vec2 point;
    Vec2 tangent;
    Vec2 normal;
    double speed;
};

EdgeFrame edge_frame(const EdgeGeom& edge, double t);

/// Arc-length integral int_e f de = int f(gamma(t), t) |gamma'(t)| dt.
/// The integrand sees both the physical point and the edge parameter.
double edge_integral(const EdgeGeom& edge,
                     const std::function<double(const Vec2&, double)>& f,
                     int n_gauss);

double edge_arclength(const EdgeGeom& edge, int n_gauss);

/// One traversal step of a cell boundary: sign +1 follows the edge's
/// intrinsic direction, -1 runs it backwards. sign equals sigma_{E,e}
/// for counterclockwise cells.
struct DirectedEdge {
    const EdgeGeom* geom = nullptr;
    double sign = 1.0;
};

using CellBoundary = std::vector<DirectedEdge>;

/// Throws OpenLoop unless consecutive endpoints chain and close to
/// tol_rel * scale.
void check_closed_loop(const CellBoundary& boundary, double scale,
                       double tol_rel = 1e-12);

/// Integral of the scaled monomial ((x-xc)/h)^ax ((y-yc)/h)^ay over the
/// region bounded by `boundary`, reduced to edge integrals through the
/// divergence theorem. `use_y_primitive` switches the primitive used
/// (F = (int m dx, 0) versus (0, int m dy)); both give the same value and
/// the second exists for cross-checking.
double element_monomial_integral(const CellBoundary& boundary, const Vec2& center,
                                 double scale, int ax, int ay, int n_gauss,
                                 bool use_y_primitive = false);

double element_signed_area(const CellBoundary& boundary, int n_gauss);

struct ElementMeasures {
    double area = 0.0;
    Vec2 centroid = Vec2::Zero();
    double diameter = 0.0;
};

/// Area, centroid, diameter. Area from the zeroth moment, centroid from
/// first moments, diameter sampled over vertices plus a few points per
/// curved edge. Throws NegativeArea when the loop is clockwise.
ElementMeasures element_measures(const CellBoundary& boundary, int n_gauss = 8);

/// Integral of f over a curved polygon by fanning curved triangles from a
/// star point. `order` is the polynomial degree integrated exactly on
/// straight-edge cells. Throws StarPointInvalid if the fan Jacobian
/// changes sign at a quadrature node.
double element_bulk_integral(const CellBoundary& boundary,
                             const std::function<double(const Vec2&)>& f,
                             int order, const Vec2& star_point);

/// True when the fan Jacobian from `star` is strictly positive at all
/// sample nodes (the quadrature star test).
bool star_point_ok(const CellBoundary& boundary, const Vec2& star, int order = 6);

}  // namespace curvem
