#pragma once

#include <memory>
#include <random>
#include <vector>

#include "curvem/mesh.hpp"
#include "curvem/poly.hpp"

namespace curvem::testing {

/// Standalone cell for geometry tests: owns its edge geometries, all
/// oriented so that +1 traversal runs the loop counterclockwise.
struct TestCell {
    std::vector<EdgeGeom> edges;

    CellBoundary boundary() const {
        CellBoundary b;
        for (const EdgeGeom& e : edges) b.push_back({&e, 1.0});
        return b;
    }
};

/// Circular arc from p0 to p1 bulging left of the chord by
/// sagitta = bulge * chord length (outward on counterclockwise loops).
inline EdgeGeom make_arc_edge(const Vec2& p0, const Vec2& p1, double bulge) {
    const Vec2 chord = p1 - p0;
    const double c = chord.norm();
    const double s = bulge * c;
    const double R = (0.25 * c * c + s * s) / (2.0 * s);
    const Vec2 mid = 0.5 * (p0 + p1);
    const Vec2 left(-chord.y() / c, chord.x() / c);
    const Vec2 center = mid - (R - s) * left;
    auto curve = std::make_shared<ParametricCurve>(make_circle_curve(center, R));
    // Left-bulging traversal p0 -> p1 runs clockwise around the center.
    double t0 = std::atan2(p0.y() - center.y(), p0.x() - center.x());
    const double t1 = std::atan2(p1.y() - center.y(), p1.x() - center.x());
    while (t0 <= t1) t0 += 2.0 * EIGEN_PI;
    return EdgeGeom::curved(curve, t1, t0, -1);
}

inline TestCell make_polygon(const std::vector<Vec2>& pts) {
    TestCell cell;
    for (std::size_t i = 0; i < pts.size(); ++i)
        cell.edges.push_back(EdgeGeom::straight(pts[i], pts[(i + 1) % pts.size()]));
    return cell;
}

/// Random star-shaped polygon around `center`; optionally one edge is
/// replaced by a mild circular arc.
inline TestCell make_random_cell(std::mt19937& rng, const Vec2& center, double scale,
                                 int n_vertices, bool one_curved_edge) {
    std::uniform_real_distribution<double> ur(0.75, 1.0);
    std::uniform_real_distribution<double> uj(-0.15, 0.15);
    std::vector<Vec2> pts;
    for (int i = 0; i < n_vertices; ++i) {
        const double theta =
            2.0 * EIGEN_PI * (i + 0.5 * uj(rng)) / static_cast<double>(n_vertices);
        const double r = scale * ur(rng);
        pts.emplace_back(center.x() + r * std::cos(theta),
                         center.y() + r * std::sin(theta));
    }
    TestCell cell = make_polygon(pts);
    if (one_curved_edge) {
        std::uniform_int_distribution<int> pick(0, n_vertices - 1);
        std::uniform_real_distribution<double> ub(0.05, 0.12);
        const int e = pick(rng);
        cell.edges[e] = make_arc_edge(pts[e], pts[(e + 1) % n_vertices], ub(rng));
    }
    return cell;
}

/// Single-cell mesh wrapping a TestCell (all boundary edges natural).
inline Mesh single_cell_mesh(const TestCell& cell) {
    Mesh mesh;
    const int m = static_cast<int>(cell.edges.size());
    for (int i = 0; i < m; ++i) mesh.vertices.push_back(cell.edges[i].start());
    MeshCell mc;
    for (int i = 0; i < m; ++i) {
        MeshEdge e;
        e.geom = cell.edges[i];
        e.v0 = i;
        e.v1 = (i + 1) % m;
        e.tag = EdgeTag::Natural;
        mesh.edges.push_back(std::move(e));
        mc.loop.push_back({i, 1.0});
    }
    mesh.cells.push_back(std::move(mc));
    return mesh;
}

/// Smooth vector field with closed-form divergence.
struct SmoothField {
    std::function<Vec2(const Vec2&)> w;
    std::function<double(const Vec2&)> div_w;
};

inline SmoothField make_random_field(std::mt19937& rng) {
    std::uniform_real_distribution<double> uc(-1.0, 1.0);
    std::uniform_real_distribution<double> uf(0.5, 1.8);
    const double a = uf(rng), b = uf(rng);
    const double c1 = uc(rng), c2 = uc(rng), c3 = uc(rng), c4 = uc(rng);
    SmoothField f;
    f.w = [=](const Vec2& p) {
        return Vec2(c1 * std::sin(a * p.x()) * std::cos(b * p.y()) +
                        c3 * p.x() * p.x() * p.y(),
                    c2 * std::exp(0.3 * p.x()) * std::sin(b * p.y()) +
                        c4 * p.y() * p.y());
    };
    f.div_w = [=](const Vec2& p) {
        return c1 * a * std::cos(a * p.x()) * std::cos(b * p.y()) +
               2.0 * c3 * p.x() * p.y() +
               c2 * b * std::exp(0.3 * p.x()) * std::cos(b * p.y()) +
               2.0 * c4 * p.y();
    };
    return f;
}

/// Random vector polynomial of the given degree in the cell basis.
inline VectorPolyCoeffs random_vector_poly(std::mt19937& rng, int degree) {
    std::uniform_real_distribution<double> uc(-1.0, 1.0);
    VectorPolyCoeffs v(2 * poly_space_dim(degree));
    for (int i = 0; i < v.size(); ++i) v(i) = uc(rng);
    return v;
}

}  // namespace curvem::testing
