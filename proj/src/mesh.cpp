#include "curvem/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "curvem/log.hpp"

namespace curvem {

CellBoundary Mesh::cell_boundary(int cell) const {
    CellBoundary b;
    b.reserve(cells[cell].loop.size());
    for (const SignedEdgeRef& r : cells[cell].loop)
        b.push_back({&edges[r.edge].geom, r.sign});
    return b;
}

ElementMeasures Mesh::cell_measures(int cell, int n_gauss) const {
    return element_measures(cell_boundary(cell), n_gauss);
}

double Mesh::bbox_diameter() const {
    if (vertices.empty()) return 0.0;
    Vec2 lo = vertices.front(), hi = vertices.front();
    for (const Vec2& v : vertices) {
        lo = lo.cwiseMin(v);
        hi = hi.cwiseMax(v);
    }
    return (hi - lo).norm();
}

// ------------------------------------------------------------- builders

namespace {

int grid_vertex(int i, int j, int n) { return j * (n + 1) + i; }

void rebuild_straight_geoms(Mesh& mesh) {
    for (MeshEdge& e : mesh.edges)
        if (e.geom.is_straight())
            e.geom = EdgeGeom::straight(mesh.vertices[e.v0], mesh.vertices[e.v1]);
}

}  // namespace

Mesh build_square_grid(int n, double lo, double hi) {
    if (n < 1) throw Error("grid needs n >= 1");
    Mesh mesh;
    const double w = (hi - lo) / n;
    for (int j = 0; j <= n; ++j)
        for (int i = 0; i <= n; ++i)
            mesh.vertices.emplace_back(lo + i * w, lo + j * w);

    // Horizontal edges first (i,j) -> (i+1,j), then vertical (i,j) -> (i,j+1).
    std::vector<std::vector<int>> hor(n + 1, std::vector<int>(n, -1));
    std::vector<std::vector<int>> ver(n + 1, std::vector<int>(n, -1));
    for (int j = 0; j <= n; ++j)
        for (int i = 0; i < n; ++i) {
            MeshEdge e;
            e.v0 = grid_vertex(i, j, n);
            e.v1 = grid_vertex(i + 1, j, n);
            e.tag = (j == 0 || j == n) ? EdgeTag::Natural : EdgeTag::Interior;
            e.geom = EdgeGeom::straight(mesh.vertices[e.v0], mesh.vertices[e.v1]);
            hor[j][i] = static_cast<int>(mesh.edges.size());
            mesh.edges.push_back(std::move(e));
        }
    for (int i = 0; i <= n; ++i)
        for (int j = 0; j < n; ++j) {
            MeshEdge e;
            e.v0 = grid_vertex(i, j, n);
            e.v1 = grid_vertex(i, j + 1, n);
            e.tag = (i == 0 || i == n) ? EdgeTag::Natural : EdgeTag::Interior;
            e.geom = EdgeGeom::straight(mesh.vertices[e.v0], mesh.vertices[e.v1]);
            ver[i][j] = static_cast<int>(mesh.edges.size());
            mesh.edges.push_back(std::move(e));
        }
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
            MeshCell c;
            c.loop = {{hor[j][i], 1.0},
                      {ver[i + 1][j], 1.0},
                      {hor[j + 1][i], -1.0},
                      {ver[i][j], -1.0}};
            mesh.cells.push_back(std::move(c));
        }
    return mesh;
}

Vec2 deformed_quad_vertex_map(const Vec2& p, const std::function<double(double)>& g1,
                              const std::function<double(double)>& g2) {
    const double x = p.x(), y = p.y();
    if (y <= 0.5) return Vec2(x, y + g2(x) * (1.0 - 2.0 * y));
    return Vec2(x, 1.0 - y + g1(x) * (2.0 * y - 1.0));
}

Mesh build_deformed_quad_mesh(int n, const ParametricCurve& g1_top,
                              const ParametricCurve& g2_bottom) {
    Mesh mesh = build_square_grid(n, 0.0, 1.0);
    auto g1 = [&](double x) { return g1_top.eval(x).y(); };
    auto g2 = [&](double x) { return g2_bottom.eval(x).y(); };
    for (Vec2& v : mesh.vertices) v = deformed_quad_vertex_map(v, g1, g2);
    rebuild_straight_geoms(mesh);

    auto top = std::make_shared<ParametricCurve>(g1_top);
    auto bottom = std::make_shared<ParametricCurve>(g2_bottom);
    mesh.curves["top"] = top;
    mesh.curves["bottom"] = bottom;

    // Bottom row edges j=0 are the first n edges, top row j=n starts at n*n.
    for (int i = 0; i < n; ++i) {
        const double t0 = static_cast<double>(i) / n;
        const double t1 = static_cast<double>(i + 1) / n;
        MeshEdge& eb = mesh.edges[i];
        eb.geom = EdgeGeom::curved(bottom, t0, t1, +1);
        eb.curve_name = "bottom";
        MeshEdge& et = mesh.edges[static_cast<std::size_t>(n) * n + i];
        et.geom = EdgeGeom::curved(top, t0, t1, +1);
        et.curve_name = "top";
    }
    for (int c = 0; c < static_cast<int>(mesh.cells.size()); ++c) {
        if (element_signed_area(mesh.cell_boundary(c), 8) <= 0.0)
            throw InvertedCell("deformation flipped cell " + std::to_string(c));
    }
    return mesh;
}

// ------------------------------------------------------------- cutting

namespace {

struct Crossing {
    double t = 0.0;  // curve parameter
    double s = 0.0;  // position along the edge chord in [0,1]
};

double segment_side(const Vec2& a, const Vec2& b, const Vec2& p) {
    const Vec2 d = b - a;
    return d.x() * (p.y() - a.y()) - d.y() * (p.x() - a.x());
}

// Root of segment_side(a,b,gamma(t)) on a bracketing interval: bisection
// followed by a few Newton steps. Throws on a tangential touch.
double refine_crossing(const ParametricCurve& curve, const Vec2& a, const Vec2& b,
                       double t_lo, double t_hi, double span) {
    double f_lo = segment_side(a, b, curve.eval(t_lo));
    for (int it = 0; it < 80; ++it) {
        const double t_mid = 0.5 * (t_lo + t_hi);
        const double f_mid = segment_side(a, b, curve.eval(t_mid));
        if ((f_lo <= 0.0) == (f_mid <= 0.0)) {
            t_lo = t_mid;
            f_lo = f_mid;
        } else {
            t_hi = t_mid;
        }
        if (t_hi - t_lo < 1e-13 * span) break;
    }
    double t = 0.5 * (t_lo + t_hi);
    const Vec2 d = b - a;
    for (int it = 0; it < 3; ++it) {
        const Vec2 g = curve.eval(t);
        const Vec2 dg = curve.deriv(t);
        const double f = segment_side(a, b, g);
        const double df = d.x() * dg.y() - d.y() * dg.x();
        if (std::abs(df) < 1e-10 * d.norm() * dg.norm())
            throw TangentialIntersection("curve grazes an edge near t = " +
                                         std::to_string(t));
        t -= f / df;
    }
    return t;
}

double point_segment_distance(const Vec2& a, const Vec2& b, const Vec2& p, double& s) {
    const Vec2 d = b - a;
    s = std::clamp((p - a).dot(d) / d.squaredNorm(), 0.0, 1.0);
    return (a + s * d - p).norm();
}

bool point_in_polyline(const std::vector<Vec2>& poly, const Vec2& p) {
    bool inside = false;
    for (std::size_t i = 0, j = poly.size() - 1; i < poly.size(); j = i++) {
        const Vec2& pi = poly[i];
        const Vec2& pj = poly[j];
        if ((pi.y() > p.y()) != (pj.y() > p.y()) &&
            p.x() < (pj.x() - pi.x()) * (p.y() - pi.y()) / (pj.y() - pi.y()) + pi.x())
            inside = !inside;
    }
    return inside;
}

std::vector<Vec2> cell_polyline(const Mesh& mesh, const MeshCell& cell, int per_edge) {
    std::vector<Vec2> poly;
    for (const SignedEdgeRef& r : cell.loop) {
        const EdgeGeom& g = mesh.edges[r.edge].geom;
        const Interval iv = g.param();
        for (int q = 0; q < per_edge; ++q) {
            const double u = static_cast<double>(q) / per_edge;
            const double t = r.sign > 0 ? iv.a + u * iv.length() : iv.b - u * iv.length();
            poly.push_back(g.eval(t));
        }
    }
    return poly;
}

bool point_in_cell(const Mesh& mesh, int cell, const Vec2& p) {
    return point_in_polyline(cell_polyline(mesh, mesh.cells[cell], 12), p);
}

int default_side(const ParametricCurve& curve, const Vec2& p) {
    if (curve.kind == CurveKind::CircleArc && curve.params.size() >= 3) {
        const Vec2 c(curve.params[0], curve.params[1]);
        return (p - c).norm() < curve.params[2] ? 1 : 0;
    }
    if (curve.kind == CurveKind::AnalyticGraph)
        return p.y() > curve.eval(p.x()).y() ? 1 : 0;
    throw Error("no side test available for this curve kind; supply a classifier");
}

EdgeGeom curved_edge_between(const std::shared_ptr<const ParametricCurve>& curve,
                             double t_from, double t_to) {
    // Edge running from gamma(t_from) to gamma(t_to).
    if (t_from < t_to) return EdgeGeom::curved(curve, t_from, t_to, +1);
    return EdgeGeom::curved(curve, t_to, t_from, -1);
}

}  // namespace

Mesh cut_mesh_with_curve(const Mesh& mesh, const ParametricCurve& curve,
                         const CutOptions& options) {
    Mesh out = mesh;
    const double span = curve.param_interval.length();
    const double t_a = curve.param_interval.a;
    const double t_b = curve.param_interval.b;
    const double mesh_scale = out.bbox_diameter();
    const bool closed = (curve.eval(t_a) - curve.eval(t_b)).norm() < 1e-12 * mesh_scale;

    // Characteristic edge length for snapping.
    double h_edge = 0.0;
    for (const MeshEdge& e : out.edges)
        h_edge = std::max(h_edge, (out.vertices[e.v1] - out.vertices[e.v0]).norm());
    const double snap_abs = options.snap_rel * h_edge;

    // -- locate crossings by scanning the sampled curve against each edge.
    const int N = options.scan_samples;
    std::vector<Vec2> samples(N + 1);
    std::vector<double> ts(N + 1);
    for (int i = 0; i <= N; ++i) {
        ts[i] = t_a + span * i / N;
        samples[i] = curve.eval(ts[i]);
    }

    std::vector<std::vector<Crossing>> edge_crossings(out.edges.size());
    bool any_crossing = false;
    for (int ei = 0; ei < static_cast<int>(out.edges.size()); ++ei) {
        const MeshEdge& e = out.edges[ei];
        if (!e.geom.is_straight()) continue;  // only straight background edges are cut
        const Vec2 a = out.vertices[e.v0];
        const Vec2 b = out.vertices[e.v1];
        const Vec2 lo = a.cwiseMin(b).array() - snap_abs;
        const Vec2 hi = a.cwiseMax(b).array() + snap_abs;
        double f_prev = segment_side(a, b, samples[0]);
        for (int i = 0; i < N; ++i) {
            const double f_next = segment_side(a, b, samples[i + 1]);
            const bool bracket = (f_prev <= 0.0) != (f_next <= 0.0);
            f_prev = f_next;
            if (!bracket) continue;
            // coarse bbox rejection on the sample pair
            const Vec2 slo = samples[i].cwiseMin(samples[i + 1]);
            const Vec2 shi = samples[i].cwiseMax(samples[i + 1]);
            if (slo.x() > hi.x() || shi.x() < lo.x() || slo.y() > hi.y() ||
                shi.y() < lo.y())
                continue;
            const double t = refine_crossing(curve, a, b, ts[i], ts[i + 1], span);
            const Vec2 p = curve.eval(t);
            const Vec2 d = b - a;
            const double s = (p - a).dot(d) / d.squaredNorm();
            if (s < -snap_abs / d.norm() || s > 1.0 + snap_abs / d.norm()) continue;
            edge_crossings[ei].push_back({t, s});
            any_crossing = true;
        }
        // An open curve may terminate exactly on an edge; register the endpoints.
        if (!closed) {
            for (double te : {t_a, t_b}) {
                double s;
                if (point_segment_distance(a, b, curve.eval(te), s) < 1e-10 * mesh_scale) {
                    edge_crossings[ei].push_back({te, s});
                    any_crossing = true;
                }
            }
        }
        auto& cr = edge_crossings[ei];
        std::sort(cr.begin(), cr.end(),
                  [](const Crossing& x, const Crossing& y) { return x.s < y.s; });
        cr.erase(std::unique(cr.begin(), cr.end(),
                             [&](const Crossing& x, const Crossing& y) {
                                 return std::abs(x.t - y.t) < 1e-11 * span;
                             }),
                 cr.end());
    }

    std::map<int, double> vertex_param;  // vertex index -> curve parameter

    if (!any_crossing) {
        // Closed curve fully inside one cell carves out the enclosed region.
        if (!closed) return mesh;
        int host = -1;
        const Vec2 probe = curve.eval(t_a);
        for (int c = 0; c < static_cast<int>(out.cells.size()); ++c)
            if (point_in_cell(out, c, probe)) { host = c; break; }
        if (host < 0) return mesh;

        auto shared = std::make_shared<ParametricCurve>(curve);
        out.curves[options.curve_name] = shared;
        const double t_mid = t_a + 0.5 * span;
        const int v_start = static_cast<int>(out.vertices.size());
        out.vertices.push_back(curve.eval(t_a));
        const int v_mid = static_cast<int>(out.vertices.size());
        out.vertices.push_back(curve.eval(t_mid));

        MeshEdge arc1;
        arc1.geom = EdgeGeom::curved(shared, t_a, t_mid, +1);
        arc1.v0 = v_start;
        arc1.v1 = v_mid;
        arc1.tag = EdgeTag::Interior;
        arc1.curve_name = options.curve_name;
        MeshEdge arc2;
        arc2.geom = EdgeGeom::curved(shared, t_mid, t_b, +1);
        arc2.v0 = v_mid;
        arc2.v1 = v_start;
        arc2.tag = EdgeTag::Interior;
        arc2.curve_name = options.curve_name;
        const int e1 = static_cast<int>(out.edges.size());
        out.edges.push_back(std::move(arc1));
        const int e2 = static_cast<int>(out.edges.size());
        out.edges.push_back(std::move(arc2));

        MeshCell inner;
        inner.loop = {{e1, 1.0}, {e2, 1.0}};
        inner.region_id = out.cells[host].region_id;
        CellBoundary ib;
        ib.push_back({&out.edges[e1].geom, 1.0});
        ib.push_back({&out.edges[e2].geom, 1.0});
        const bool ccw = element_signed_area(ib, 8) > 0.0;
        if (!ccw) inner.loop = {{e2, -1.0}, {e1, -1.0}};

        MeshCell outer = out.cells[host];
        if (ccw) {
            outer.loop.push_back({e2, -1.0});
            outer.loop.push_back({e1, -1.0});
        } else {
            outer.loop.push_back({e1, 1.0});
            outer.loop.push_back({e2, 1.0});
        }
        out.cells[host] = inner;
        out.cells.push_back(outer);

        auto classify = options.classify
                            ? *options.classify
                            : std::function<int(const Vec2&)>([&](const Vec2& p) {
                                  return 2 * mesh.cells[host].region_id +
                                         default_side(curve, p);
                              });
        assign_regions(out, classify);
        return out;
    }

    auto shared = std::make_shared<ParametricCurve>(curve);
    out.curves[options.curve_name] = shared;

    // -- snap crossings that fall within snap_abs of an existing vertex.
    for (int ei = 0; ei < static_cast<int>(out.edges.size()); ++ei) {
        auto& cr = edge_crossings[ei];
        if (cr.empty()) continue;
        const MeshEdge& e = out.edges[ei];
        const double len = (out.vertices[e.v1] - out.vertices[e.v0]).norm();
        std::vector<Crossing> keep;
        for (const Crossing& c : cr) {
            if (c.s * len < snap_abs) {
                out.vertices[e.v0] = curve.eval(c.t);
                vertex_param[e.v0] = c.t;
            } else if ((1.0 - c.s) * len < snap_abs) {
                out.vertices[e.v1] = curve.eval(c.t);
                vertex_param[e.v1] = c.t;
            } else {
                keep.push_back(c);
            }
        }
        cr = std::move(keep);
    }
    rebuild_straight_geoms(out);

    // -- split edges at the remaining interior crossings.
    std::vector<std::vector<SignedEdgeRef>> replacement(out.edges.size());
    const int n_orig_edges = static_cast<int>(out.edges.size());
    for (int ei = 0; ei < n_orig_edges; ++ei) {
        if (edge_crossings[ei].empty()) {
            replacement[ei] = {{ei, 1.0}};
            continue;
        }
        MeshEdge e = out.edges[ei];
        std::vector<int> chain_vertices = {e.v0};
        for (const Crossing& c : edge_crossings[ei]) {
            const int nv = static_cast<int>(out.vertices.size());
            out.vertices.push_back(curve.eval(c.t));
            vertex_param[nv] = c.t;
            chain_vertices.push_back(nv);
        }
        chain_vertices.push_back(e.v1);
        std::vector<SignedEdgeRef> refs;
        for (std::size_t i = 0; i + 1 < chain_vertices.size(); ++i) {
            MeshEdge sub;
            sub.v0 = chain_vertices[i];
            sub.v1 = chain_vertices[i + 1];
            sub.tag = e.tag;
            sub.geom = EdgeGeom::straight(out.vertices[sub.v0], out.vertices[sub.v1]);
            if (i == 0) {
                out.edges[ei] = sub;
                refs.push_back({ei, 1.0});
            } else {
                refs.push_back({static_cast<int>(out.edges.size()), 1.0});
                out.edges.push_back(std::move(sub));
            }
        }
        replacement[ei] = std::move(refs);
    }
    for (MeshCell& cell : out.cells) {
        std::vector<SignedEdgeRef> loop;
        for (const SignedEdgeRef& r : cell.loop) {
            const auto& reps = replacement[r.edge];
            if (r.sign > 0)
                for (const auto& rr : reps) loop.push_back(rr);
            else
                for (auto it = reps.rbegin(); it != reps.rend(); ++it)
                    loop.push_back({it->edge, -it->sign});
        }
        cell.loop = std::move(loop);
    }

    // -- split every cell whose boundary carries exactly two curve vertices.
    std::vector<MeshCell> new_cells;
    for (int ci = 0; ci < static_cast<int>(out.cells.size()); ++ci) {
        MeshCell& cell = out.cells[ci];
        std::vector<int> loop_vertices(cell.loop.size());
        for (std::size_t i = 0; i < cell.loop.size(); ++i)
            loop_vertices[i] = out.ref_start(cell.loop[i]);

        std::vector<std::size_t> hits;
        for (std::size_t i = 0; i < loop_vertices.size(); ++i)
            if (vertex_param.count(loop_vertices[i])) hits.push_back(i);

        if (hits.size() < 2) {
            new_cells.push_back(cell);
            continue;
        }
        if (hits.size() > 2)
            throw TooManyCrossings("cell " + std::to_string(ci) + " boundary crossed " +
                                   std::to_string(hits.size()) +
                                   " times; refine the background grid");

        const std::size_t ia = hits[0], ib = hits[1];
        const int va = loop_vertices[ia], vb = loop_vertices[ib];
        double ta = vertex_param.at(va), tb = vertex_param.at(vb);

        // Choose the curve arc joining the two vertices that actually runs
        // through this cell (closed curves offer two candidates).
        double u0 = std::min(ta, tb), u1 = std::max(ta, tb);
        bool arc_found = true;
        const Vec2 mid_inner = curve.eval(0.5 * (u0 + u1));
        if (!point_in_cell(out, ci, mid_inner)) {
            if (closed) {
                const double w0 = u1, w1 = u0 + span;
                if (point_in_cell(out, ci, curve.eval(0.5 * (w0 + w1)))) {
                    u0 = w0;
                    u1 = w1;
                } else {
                    arc_found = false;
                }
            } else {
                arc_found = false;
            }
        }
        if (!arc_found) {
            // The curve only grazes two boundary vertices of this cell.
            new_cells.push_back(cell);
            continue;
        }

        MeshEdge ce;
        ce.geom = curved_edge_between(shared, u0, u1);
        ce.tag = EdgeTag::Interior;
        ce.curve_name = options.curve_name;
        // Orient the stored endpoints to match gamma(u0) -> gamma(u1).
        const Vec2 pu0 = curve.eval(u0);
        const bool starts_at_va = (pu0 - out.vertices[va]).norm() <=
                                  (pu0 - out.vertices[vb]).norm();
        ce.v0 = starts_at_va ? va : vb;
        ce.v1 = starts_at_va ? vb : va;
        const int enew = static_cast<int>(out.edges.size());
        out.edges.push_back(std::move(ce));

        auto chain = [&](std::size_t from, std::size_t to) {
            std::vector<SignedEdgeRef> c;
            for (std::size_t i = from; i != to; i = (i + 1) % cell.loop.size())
                c.push_back(cell.loop[i]);
            return c;
        };
        // Chain A runs va -> vb along the old boundary, closed by the curved
        // edge traversed vb -> va; chain B the complement.
        MeshCell cellA;
        cellA.region_id = cell.region_id;
        cellA.loop = chain(ia, ib);
        cellA.loop.push_back({enew, out.edges[enew].v0 == vb ? 1.0 : -1.0});
        MeshCell cellB;
        cellB.region_id = cell.region_id;
        cellB.loop = chain(ib, ia);
        cellB.loop.push_back({enew, out.edges[enew].v0 == va ? 1.0 : -1.0});

        for (MeshCell* nc : {&cellA, &cellB}) {
            CellBoundary b;
            for (const SignedEdgeRef& r : nc->loop)
                b.push_back({&out.edges[r.edge].geom, r.sign});
            if (element_signed_area(b, 8) <= 0.0)
                throw TopologyError("cell split produced a non-ccw loop in cell " +
                                    std::to_string(ci));
        }
        new_cells.push_back(std::move(cellA));
        new_cells.push_back(std::move(cellB));
    }
    out.cells = std::move(new_cells);

    auto classify = options.classify
                        ? *options.classify
                        : std::function<int(const Vec2&)>([&curve, &out](const Vec2& p) {
                              (void)out;
                              return default_side(curve, p);
                          });
    if (options.classify) {
        assign_regions(out, classify);
    } else {
        for (int c = 0; c < static_cast<int>(out.cells.size()); ++c) {
            const Vec2 xc = out.cell_measures(c).centroid;
            out.cells[c].region_id = 2 * out.cells[c].region_id + default_side(curve, xc);
        }
    }
    return out;
}

// ------------------------------------------------------------- transforms

Mesh straighten(const Mesh& mesh) {
    Mesh out = mesh;
    for (MeshEdge& e : out.edges) {
        if (e.geom.is_straight()) continue;
        e.data_geom = std::make_shared<EdgeGeom>(e.geom);
        e.geom = EdgeGeom::straight(out.vertices[e.v0], out.vertices[e.v1]);
        e.curve_name.clear();
    }
    return out;
}

void assign_regions(Mesh& mesh, const std::function<int(const Vec2&)>& classify) {
    for (int c = 0; c < static_cast<int>(mesh.cells.size()); ++c)
        mesh.cells[c].region_id = classify(mesh.cell_measures(c).centroid);
}

void set_boundary_tags(Mesh& mesh, EdgeTag tag) {
    std::vector<int> uses(mesh.edges.size(), 0);
    for (const MeshCell& c : mesh.cells)
        for (const SignedEdgeRef& r : c.loop) uses[r.edge]++;
    for (std::size_t e = 0; e < mesh.edges.size(); ++e)
        if (uses[e] == 1) mesh.edges[e].tag = tag;
}

// ------------------------------------------------------------- validation

MeshQualityReport validate(const Mesh& mesh) {
    const double scale = mesh.bbox_diameter();

    std::vector<double> sign_sum(mesh.edges.size(), 0.0);
    std::vector<int> uses(mesh.edges.size(), 0);
    for (const MeshCell& c : mesh.cells)
        for (const SignedEdgeRef& r : c.loop) {
            uses[r.edge]++;
            sign_sum[r.edge] += r.sign;
        }
    for (std::size_t e = 0; e < mesh.edges.size(); ++e) {
        const bool interior = mesh.edges[e].tag == EdgeTag::Interior;
        if (interior) {
            if (uses[e] != 2 || sign_sum[e] != 0.0)
                throw TopologyError("interior edge " + std::to_string(e) +
                                    " must be used twice with opposite signs");
        } else if (uses[e] != 1) {
            throw TopologyError("boundary edge " + std::to_string(e) +
                                " must be used exactly once");
        }
        const MeshEdge& me = mesh.edges[e];
        if ((me.geom.start() - mesh.vertices[me.v0]).norm() > 1e-12 * scale ||
            (me.geom.end() - mesh.vertices[me.v1]).norm() > 1e-12 * scale)
            throw TopologyError("edge " + std::to_string(e) +
                                " geometry does not meet its vertices");
    }

    MeshQualityReport rep;
    rep.cell_count = static_cast<int>(mesh.cells.size());
    rep.edge_count = static_cast<int>(mesh.edges.size());
    rep.star_ok.resize(mesh.cells.size(), false);
    rep.min_edge_ratio = std::numeric_limits<double>::infinity();
    double h_sum = 0.0;
    for (int c = 0; c < rep.cell_count; ++c) {
        CellBoundary b = mesh.cell_boundary(c);
        try {
            check_closed_loop(b, scale);
        } catch (const OpenLoop& e) {
            throw TopologyError("cell " + std::to_string(c) + ": " + e.what());
        }
        ElementMeasures m;
        try {
            m = element_measures(b, 8);
        } catch (const NegativeArea& e) {
            throw TopologyError("cell " + std::to_string(c) + ": " + e.what());
        }
        h_sum += m.diameter;
        for (const SignedEdgeRef& r : mesh.cells[c].loop) {
            const double he = edge_arclength(mesh.edges[r.edge].geom, 8);
            rep.min_edge_ratio = std::min(rep.min_edge_ratio, he / m.diameter);
        }
        rep.star_ok[c] = star_point_ok(b, m.centroid);
        if (!rep.star_ok[c])
            log::warn("cell %d fails the centroid star test", c);
    }
    rep.h = mesh.cells.empty() ? 0.0 : h_sum / rep.cell_count;
    return rep;
}

bool meshes_equal(const Mesh& a, const Mesh& b) {
    if (a.vertices.size() != b.vertices.size() || a.edges.size() != b.edges.size() ||
        a.cells.size() != b.cells.size() || a.curves.size() != b.curves.size())
        return false;
    for (std::size_t i = 0; i < a.vertices.size(); ++i)
        if (a.vertices[i].x() != b.vertices[i].x() ||
            a.vertices[i].y() != b.vertices[i].y())
            return false;
    for (std::size_t i = 0; i < a.edges.size(); ++i) {
        const MeshEdge& ea = a.edges[i];
        const MeshEdge& eb = b.edges[i];
        if (ea.v0 != eb.v0 || ea.v1 != eb.v1 || ea.tag != eb.tag ||
            ea.curve_name != eb.curve_name ||
            ea.geom.is_straight() != eb.geom.is_straight())
            return false;
        if (!ea.geom.is_straight() &&
            (ea.geom.curve_t0() != eb.geom.curve_t0() ||
             ea.geom.curve_t1() != eb.geom.curve_t1() ||
             ea.geom.orientation() != eb.geom.orientation()))
            return false;
    }
    for (std::size_t i = 0; i < a.cells.size(); ++i) {
        if (a.cells[i].region_id != b.cells[i].region_id ||
            a.cells[i].loop.size() != b.cells[i].loop.size())
            return false;
        for (std::size_t j = 0; j < a.cells[i].loop.size(); ++j)
            if (a.cells[i].loop[j].edge != b.cells[i].loop[j].edge ||
                a.cells[i].loop[j].sign != b.cells[i].loop[j].sign)
                return false;
    }
    for (const auto& [name, curve] : a.curves) {
        auto it = b.curves.find(name);
        if (it == b.curves.end()) return false;
        if (curve->kind != it->second->kind || curve->subkind != it->second->subkind ||
            curve->params != it->second->params)
            return false;
    }
    return true;
}

}  // namespace curvem
