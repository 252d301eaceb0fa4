#include "curvem/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>

namespace curvem {

// ---------------------------------------------------------------- curves

ParametricCurve make_segment_curve(const Vec2& p0, const Vec2& p1) {
    ParametricCurve c;
    c.kind = CurveKind::AffineSegment;
    const double len = (p1 - p0).norm();
    if (len <= 0.0) throw DegenerateEdge("segment curve with coincident endpoints");
    c.param_interval = {0.0, len};
    const Vec2 dir = (p1 - p0) / len;
    c.eval = [p0, dir](double t) { return Vec2(p0 + t * dir); };
    c.deriv = [dir](double) { return dir; };
    c.params = {p0.x(), p0.y(), p1.x(), p1.y()};
    return c;
}

ParametricCurve make_circle_curve(const Vec2& center, double radius, double t0, double t1) {
    ParametricCurve c;
    c.kind = CurveKind::CircleArc;
    c.param_interval = {t0, t1};
    c.eval = [center, radius](double t) {
        return Vec2(center.x() + radius * std::cos(t), center.y() + radius * std::sin(t));
    };
    c.deriv = [radius](double t) {
        return Vec2(-radius * std::sin(t), radius * std::cos(t));
    };
    c.params = {center.x(), center.y(), radius};
    return c;
}

ParametricCurve make_poly_graph_curve(std::vector<double> coeffs, double x0, double x1) {
    ParametricCurve c;
    c.kind = CurveKind::AnalyticGraph;
    c.subkind = "poly";
    c.param_interval = {x0, x1};
    auto horner = [](const std::vector<double>& a, double x) {
        double v = 0.0;
        for (auto it = a.rbegin(); it != a.rend(); ++it) v = v * x + *it;
        return v;
    };
    std::vector<double> dcoeffs;
    for (std::size_t i = 1; i < coeffs.size(); ++i)
        dcoeffs.push_back(static_cast<double>(i) * coeffs[i]);
    c.eval = [coeffs, horner](double t) { return Vec2(t, horner(coeffs, t)); };
    c.deriv = [dcoeffs, horner](double t) { return Vec2(1.0, horner(dcoeffs, t)); };
    c.params = std::move(coeffs);
    return c;
}

ParametricCurve make_sin_graph_curve(double a, double w, double phi, double b,
                                     double x0, double x1) {
    ParametricCurve c;
    c.kind = CurveKind::AnalyticGraph;
    c.subkind = "sin";
    c.param_interval = {x0, x1};
    c.eval = [a, w, phi, b](double t) { return Vec2(t, a * std::sin(w * t + phi) + b); };
    c.deriv = [a, w, phi](double t) { return Vec2(1.0, a * w * std::cos(w * t + phi)); };
    c.params = {a, w, phi, b};
    return c;
}

ParametricCurve make_graph_curve(std::function<double(double)> g,
                                 std::function<double(double)> dg,
                                 double x0, double x1) {
    ParametricCurve c;
    c.kind = CurveKind::AnalyticGraph;
    c.param_interval = {x0, x1};
    c.eval = [g](double t) { return Vec2(t, g(t)); };
    c.deriv = [dg](double t) { return Vec2(1.0, dg(t)); };
    return c;
}

ParametricCurve make_composite_curve(std::vector<ParametricCurve> pieces) {
    if (pieces.empty()) throw Error("composite curve needs at least one piece");
    auto shared = std::make_shared<std::vector<ParametricCurve>>(std::move(pieces));
    std::vector<double> offsets;  // running start parameter of each piece
    double total = 0.0;
    offsets.push_back(0.0);
    for (const auto& p : *shared) {
        total += p.param_interval.length();
        offsets.push_back(total);
    }
    auto locate = [shared, offsets](double t) {
        std::size_t i = 0;
        while (i + 1 < shared->size() && t > offsets[i + 1]) ++i;
        const auto& piece = (*shared)[i];
        return std::pair<const ParametricCurve*, double>(
            &piece, piece.param_interval.a + (t - offsets[i]));
    };
    ParametricCurve c;
    c.kind = CurveKind::Composite;
    c.param_interval = {0.0, total};
    c.eval = [locate](double t) {
        auto [p, s] = locate(t);
        return p->eval(s);
    };
    c.deriv = [locate](double t) {
        auto [p, s] = locate(t);
        return p->deriv(s);
    };
    return c;
}

// ---------------------------------------------------------------- EdgeGeom

EdgeGeom EdgeGeom::straight(const Vec2& p0, const Vec2& p1) {
    EdgeGeom e;
    e.p0_ = p0;
    e.p1_ = p1;
    const double len = (p1 - p0).norm();
    if (len <= 0.0) throw DegenerateEdge("straight edge with coincident endpoints");
    e.param_ = {0.0, len};
    return e;
}

EdgeGeom EdgeGeom::curved(std::shared_ptr<const ParametricCurve> curve,
                          double t0, double t1, int orientation) {
    if (!curve) throw Error("curved edge without curve");
    if (!(t1 > t0)) throw Error("curved edge sub-interval must have t1 > t0");
    EdgeGeom e;
    e.curve_ = std::move(curve);
    e.t0_ = t0;
    e.t1_ = t1;
    e.orient_ = orientation >= 0 ? 1 : -1;
    e.param_ = e.orient_ > 0 ? Interval{t0, t1} : Interval{-t1, -t0};
    return e;
}

Vec2 EdgeGeom::eval(double t) const {
    if (!curve_) {
        const double len = param_.b;
        return p0_ + (t / len) * (p1_ - p0_);
    }
    return orient_ > 0 ? curve_->eval(t) : curve_->eval(-t);
}

Vec2 EdgeGeom::deriv(double t) const {
    if (!curve_) return (p1_ - p0_) / param_.b;
    return orient_ > 0 ? curve_->deriv(t) : Vec2(-curve_->deriv(-t));
}

// ---------------------------------------------------------------- Gauss rules

namespace {

QuadratureRule compute_gauss_legendre(int n) {
    QuadratureRule rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    // Newton iteration on P_n from Chebyshev-based initial guesses.
    for (int i = 0; i < n; ++i) {
        double x = std::cos(EIGEN_PI * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0, p1 = x;
            if (n == 1) { p0 = x; p1 = 0.0; }
            double pn = (n == 1) ? p0 : p1;
            double pm = (n == 1) ? 1.0 : p0;
            for (int j = 2; j <= n; ++j) {
                const double pj = ((2.0 * j - 1.0) * x * pn - (j - 1.0) * pm) / j;
                pm = pn;
                pn = pj;
            }
            dp = n * (x * pn - pm) / (x * x - 1.0);
            const double dx = pn / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        rule.nodes[n - 1 - i] = x;
        rule.weights[n - 1 - i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    return rule;
}

}  // namespace

const QuadratureRule& gauss_legendre(int n) {
    if (n < 1) throw IndexOutOfRange("gauss_legendre needs n >= 1");
    static std::map<int, QuadratureRule> cache;
    static std::mutex mtx;
    std::lock_guard<std::mutex> lock(mtx);
    auto it = cache.find(n);
    if (it == cache.end()) it = cache.emplace(n, compute_gauss_legendre(n)).first;
    return it->second;
}

// ---------------------------------------------------------------- edge ops

EdgeFrame edge_frame(const EdgeGeom& edge, double t) {
    EdgeFrame f;
    f.point = edge.eval(t);
    const Vec2 d = edge.deriv(t);
    f.speed = d.norm();
    if (f.speed < 1e-14) throw DegenerateEdge("edge parametrization has vanishing speed");
    f.tangent = d / f.speed;
    f.normal = rotate_cw(f.tangent);
    return f;
}

double edge_integral(const EdgeGeom& edge,
                     const std::function<double(const Vec2&, double)>& f,
                     int n_gauss) {
    const QuadratureRule& rule = gauss_legendre(n_gauss);
    const Interval iv = edge.param();
    const double half = 0.5 * iv.length();
    const double mid = iv.midpoint();
    double sum = 0.0;
    for (int q = 0; q < n_gauss; ++q) {
        const double t = mid + half * rule.nodes[q];
        const Vec2 d = edge.deriv(t);
        const double speed = d.norm();
        if (speed < 1e-14) throw DegenerateEdge("vanishing speed inside edge_integral");
        sum += rule.weights[q] * f(edge.eval(t), t) * speed;
    }
    return half * sum;
}

double edge_arclength(const EdgeGeom& edge, int n_gauss) {
    return edge_integral(edge, [](const Vec2&, double) { return 1.0; }, n_gauss);
}

// -------------------------------------------------------------- loop checks

namespace {

Vec2 directed_start(const DirectedEdge& de) {
    return de.sign > 0 ? de.geom->start() : de.geom->end();
}
Vec2 directed_end(const DirectedEdge& de) {
    return de.sign > 0 ? de.geom->end() : de.geom->start();
}

}  // namespace

void check_closed_loop(const CellBoundary& boundary, double scale, double tol_rel) {
    if (boundary.empty()) throw OpenLoop("empty boundary");
    const double tol = tol_rel * scale;
    // The boundary may consist of several closed chains (multiply connected
    // cells appear when a closed curve is embedded inside one element).
    std::size_t chain_start = 0;
    for (std::size_t i = 0; i < boundary.size(); ++i) {
        const Vec2 end = directed_end(boundary[i]);
        if (i + 1 < boundary.size()) {
            const Vec2 next = directed_start(boundary[i + 1]);
            if ((end - next).norm() <= tol) continue;
        }
        const Vec2 start = directed_start(boundary[chain_start]);
        if ((end - start).norm() > tol)
            throw OpenLoop("boundary chain does not close (gap " +
                           std::to_string((end - start).norm()) + ")");
        chain_start = i + 1;
    }
}

// --------------------------------------------- divergence-theorem integrals

double element_monomial_integral(const CellBoundary& boundary, const Vec2& center,
                                 double scale, int ax, int ay, int n_gauss,
                                 bool use_y_primitive) {
    check_closed_loop(boundary, scale);
    // F = (int m dx, 0): int_E m dE = sum_e sign int F_x(gamma) gamma'_y dt.
    // The x-antiderivative of ((x-xc)/h)^ax ((y-yc)/h)^ay is
    // h/(ax+1) * ((x-xc)/h)^(ax+1) ((y-yc)/h)^ay; symmetrically in y.
    const QuadratureRule& rule = gauss_legendre(n_gauss);
    double total = 0.0;
    for (const DirectedEdge& de : boundary) {
        const Interval iv = de.geom->param();
        const double half = 0.5 * iv.length();
        const double mid = iv.midpoint();
        double acc = 0.0;
        for (int q = 0; q < n_gauss; ++q) {
            const double t = mid + half * rule.nodes[q];
            const Vec2 p = de.geom->eval(t);
            const Vec2 d = de.geom->deriv(t);
            const double xs = (p.x() - center.x()) / scale;
            const double ys = (p.y() - center.y()) / scale;
            double val;
            if (!use_y_primitive) {
                val = scale / (ax + 1.0) * std::pow(xs, ax + 1) * std::pow(ys, ay) * d.y();
            } else {
                val = -scale / (ay + 1.0) * std::pow(xs, ax) * std::pow(ys, ay + 1) * d.x();
            }
            acc += rule.weights[q] * val;
        }
        total += de.sign * half * acc;
    }
    return total;
}

double element_signed_area(const CellBoundary& boundary, int n_gauss) {
    // Shoelace through the same boundary reduction, A = oint x dy.
    const QuadratureRule& rule = gauss_legendre(n_gauss);
    double total = 0.0;
    for (const DirectedEdge& de : boundary) {
        const Interval iv = de.geom->param();
        const double half = 0.5 * iv.length();
        const double mid = iv.midpoint();
        double acc = 0.0;
        for (int q = 0; q < n_gauss; ++q) {
            const double t = mid + half * rule.nodes[q];
            acc += rule.weights[q] * de.geom->eval(t).x() * de.geom->deriv(t).y();
        }
        total += de.sign * half * acc;
    }
    return total;
}

ElementMeasures element_measures(const CellBoundary& boundary, int n_gauss) {
    // Diameter samples: endpoints plus interior points of curved edges.
    std::vector<Vec2> samples;
    for (const DirectedEdge& de : boundary) {
        samples.push_back(de.geom->start());
        if (!de.geom->is_straight()) {
            const Interval iv = de.geom->param();
            for (int i = 1; i <= 5; ++i)
                samples.push_back(de.geom->eval(iv.a + iv.length() * i / 6.0));
        }
    }
    double diam = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i)
        for (std::size_t j = i + 1; j < samples.size(); ++j)
            diam = std::max(diam, (samples[i] - samples[j]).norm());
    if (diam <= 0.0) throw DegenerateEdge("cell with zero diameter");

    Vec2 ref = samples.front();
    const double area = element_monomial_integral(boundary, ref, diam, 0, 0, n_gauss);
    if (area <= 0.0) throw NegativeArea("cell loop is clockwise or degenerate");
    const double mx = element_monomial_integral(boundary, ref, diam, 1, 0, n_gauss);
    const double my = element_monomial_integral(boundary, ref, diam, 0, 1, n_gauss);

    ElementMeasures m;
    m.area = area;
    m.centroid = ref + diam * Vec2(mx, my) / area;
    m.diameter = diam;
    return m;
}

// ------------------------------------------------------------ bulk quadrature

double element_bulk_integral(const CellBoundary& boundary,
                             const std::function<double(const Vec2&)>& f,
                             int order, const Vec2& star_point) {
    // Fan of curved triangles {x_c + s (gamma(t) - x_c)}; ds-direction picks
    // up one polynomial degree from the Jacobian, hence order+2.
    const int n = std::max(1, (order + 2) / 2 + 1);
    const QuadratureRule& rule = gauss_legendre(n);
    double total = 0.0;
    for (const DirectedEdge& de : boundary) {
        const Interval iv = de.geom->param();
        const double half_t = 0.5 * iv.length();
        const double mid_t = iv.midpoint();
        for (int qt = 0; qt < n; ++qt) {
            const double t = mid_t + half_t * rule.nodes[qt];
            const Vec2 g = de.geom->eval(t);
            const Vec2 dg = de.geom->deriv(t) * de.sign;
            const Vec2 r = g - star_point;
            const double jac_t = r.x() * dg.y() - r.y() * dg.x();  // cross(r, gamma')
            if (jac_t <= 0.0)
                throw StarPointInvalid("fan Jacobian not positive at a quadrature node");
            for (int qs = 0; qs < n; ++qs) {
                const double s = 0.5 * (1.0 + rule.nodes[qs]);
                const Vec2 x = star_point + s * r;
                total += 0.5 * rule.weights[qs] * half_t * rule.weights[qt] * s * jac_t * f(x);
            }
        }
    }
    return total;
}

bool star_point_ok(const CellBoundary& boundary, const Vec2& star, int order) {
    const int n = std::max(1, (order + 2) / 2 + 1);
    const QuadratureRule& rule = gauss_legendre(n);
    for (const DirectedEdge& de : boundary) {
        const Interval iv = de.geom->param();
        for (int qt = 0; qt < n; ++qt) {
            const double t = iv.midpoint() + 0.5 * iv.length() * rule.nodes[qt];
            const Vec2 r = de.geom->eval(t) - star;
            const Vec2 dg = de.geom->deriv(t) * de.sign;
            if (r.x() * dg.y() - r.y() * dg.x() <= 0.0) return false;
        }
    }
    return true;
}

}  // namespace curvem
