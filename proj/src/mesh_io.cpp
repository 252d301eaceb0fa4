#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "curvem/mesh.hpp"

namespace curvem {

namespace {

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

const char* tag_name(EdgeTag t) {
    switch (t) {
        case EdgeTag::Interior: return "interior";
        case EdgeTag::Essential: return "essential";
        case EdgeTag::Natural: return "natural";
    }
    return "interior";
}

EdgeTag tag_from(const std::string& s, int line) {
    if (s == "interior") return EdgeTag::Interior;
    if (s == "essential") return EdgeTag::Essential;
    if (s == "natural") return EdgeTag::Natural;
    throw ParseError("line " + std::to_string(line) + ": unknown edge tag '" + s + "'");
}

class LineReader {
public:
    explicit LineReader(std::istream& is) : is_(is) {}

    std::istringstream next() {
        std::string line;
        while (std::getline(is_, line)) {
            ++lineno_;
            const auto pos = line.find_first_not_of(" \t\r");
            if (pos == std::string::npos || line[pos] == '#') continue;
            return std::istringstream(line);
        }
        throw ParseError("unexpected end of file after line " + std::to_string(lineno_));
    }

    int lineno() const { return lineno_; }

private:
    std::istream& is_;
    int lineno_ = 0;
};

template <typename T>
T expect(std::istringstream& ss, const char* what, int line) {
    T v;
    if (!(ss >> v))
        throw ParseError("line " + std::to_string(line) + ": expected " + what);
    return v;
}

}  // namespace

void write_mesh(const Mesh& mesh, std::ostream& os) {
    os << "CURVEM-MESH 1\n";
    os << "CURVES " << mesh.curves.size() << "\n";
    for (const auto& [name, curve] : mesh.curves) {
        os << name << " ";
        switch (curve->kind) {
            case CurveKind::CircleArc:
                os << "circle " << fmt(curve->params[0]) << " " << fmt(curve->params[1])
                   << " " << fmt(curve->params[2]);
                break;
            case CurveKind::AffineSegment:
                os << "segment " << fmt(curve->params[0]) << " " << fmt(curve->params[1])
                   << " " << fmt(curve->params[2]) << " " << fmt(curve->params[3]);
                break;
            case CurveKind::AnalyticGraph:
                if (curve->subkind == "poly") {
                    os << "polygraph " << curve->params.size();
                    for (double c : curve->params) os << " " << fmt(c);
                } else if (curve->subkind == "sin") {
                    os << "singraph " << fmt(curve->params[0]) << " "
                       << fmt(curve->params[1]) << " " << fmt(curve->params[2]) << " "
                       << fmt(curve->params[3]);
                } else {
                    throw ParseError("curve '" + name +
                                     "' is programmatic and cannot be serialized");
                }
                break;
            case CurveKind::Composite:
                throw ParseError("composite curve '" + name + "' cannot be serialized");
        }
        os << " INTERVAL " << fmt(curve->param_interval.a) << " "
           << fmt(curve->param_interval.b) << "\n";
    }
    os << "VERTICES " << mesh.vertices.size() << "\n";
    for (std::size_t i = 0; i < mesh.vertices.size(); ++i)
        os << i << " " << fmt(mesh.vertices[i].x()) << " " << fmt(mesh.vertices[i].y())
           << "\n";
    os << "EDGES " << mesh.edges.size() << "\n";
    for (std::size_t i = 0; i < mesh.edges.size(); ++i) {
        const MeshEdge& e = mesh.edges[i];
        os << i << " " << e.v0 << " " << e.v1 << " " << tag_name(e.tag) << " ";
        if (e.geom.is_straight()) {
            os << "S\n";
        } else {
            os << "C " << e.curve_name << " " << fmt(e.geom.curve_t0()) << " "
               << fmt(e.geom.curve_t1()) << " " << e.geom.orientation() << "\n";
        }
    }
    os << "CELLS " << mesh.cells.size() << "\n";
    for (const MeshCell& c : mesh.cells) {
        os << c.region_id << " " << c.loop.size();
        for (const SignedEdgeRef& r : c.loop)
            os << " " << (r.sign > 0 ? r.edge + 1 : -(r.edge + 1));
        os << "\n";
    }
}

void save_mesh(const Mesh& mesh, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw Error("cannot open '" + path + "' for writing");
    write_mesh(mesh, os);
}

Mesh read_mesh(std::istream& is) {
    LineReader rd(is);
    Mesh mesh;
    {
        auto ss = rd.next();
        std::string magic;
        int version = 0;
        ss >> magic >> version;
        if (magic != "CURVEM-MESH" || version != 1)
            throw ParseError("line " + std::to_string(rd.lineno()) +
                             ": bad header, expected 'CURVEM-MESH 1'");
    }
    {
        auto ss = rd.next();
        std::string kw;
        ss >> kw;
        if (kw != "CURVES")
            throw ParseError("line " + std::to_string(rd.lineno()) + ": expected CURVES");
        const int n = expect<int>(ss, "curve count", rd.lineno());
        for (int i = 0; i < n; ++i) {
            auto ls = rd.next();
            const int line = rd.lineno();
            const auto name = expect<std::string>(ls, "curve name", line);
            const auto kind = expect<std::string>(ls, "curve kind", line);
            ParametricCurve c;
            if (kind == "circle") {
                const double cx = expect<double>(ls, "cx", line);
                const double cy = expect<double>(ls, "cy", line);
                const double r = expect<double>(ls, "r", line);
                c = make_circle_curve(Vec2(cx, cy), r);
            } else if (kind == "segment") {
                const double x0 = expect<double>(ls, "x0", line);
                const double y0 = expect<double>(ls, "y0", line);
                const double x1 = expect<double>(ls, "x1", line);
                const double y1 = expect<double>(ls, "y1", line);
                c = make_segment_curve(Vec2(x0, y0), Vec2(x1, y1));
            } else if (kind == "polygraph") {
                const int m = expect<int>(ls, "coefficient count", line);
                std::vector<double> coeffs(m);
                for (int j = 0; j < m; ++j)
                    coeffs[j] = expect<double>(ls, "coefficient", line);
                c = make_poly_graph_curve(std::move(coeffs), 0.0, 1.0);
            } else if (kind == "singraph") {
                const double a = expect<double>(ls, "a", line);
                const double w = expect<double>(ls, "w", line);
                const double phi = expect<double>(ls, "phi", line);
                const double b = expect<double>(ls, "b", line);
                c = make_sin_graph_curve(a, w, phi, b, 0.0, 1.0);
            } else {
                throw ParseError("line " + std::to_string(line) + ": unknown curve kind '" +
                                 kind + "'");
            }
            const auto kw2 = expect<std::string>(ls, "INTERVAL", line);
            if (kw2 != "INTERVAL")
                throw ParseError("line " + std::to_string(line) + ": expected INTERVAL");
            c.param_interval.a = expect<double>(ls, "interval start", line);
            c.param_interval.b = expect<double>(ls, "interval end", line);
            mesh.curves[name] = std::make_shared<ParametricCurve>(std::move(c));
        }
    }
    {
        auto ss = rd.next();
        std::string kw;
        ss >> kw;
        if (kw != "VERTICES")
            throw ParseError("line " + std::to_string(rd.lineno()) + ": expected VERTICES");
        const int n = expect<int>(ss, "vertex count", rd.lineno());
        mesh.vertices.resize(n);
        for (int i = 0; i < n; ++i) {
            auto ls = rd.next();
            const int idx = expect<int>(ls, "vertex index", rd.lineno());
            if (idx < 0 || idx >= n)
                throw ParseError("line " + std::to_string(rd.lineno()) +
                                 ": vertex index out of range");
            const double x = expect<double>(ls, "x", rd.lineno());
            const double y = expect<double>(ls, "y", rd.lineno());
            mesh.vertices[idx] = Vec2(x, y);
        }
    }
    {
        auto ss = rd.next();
        std::string kw;
        ss >> kw;
        if (kw != "EDGES")
            throw ParseError("line " + std::to_string(rd.lineno()) + ": expected EDGES");
        const int n = expect<int>(ss, "edge count", rd.lineno());
        mesh.edges.resize(n);
        for (int i = 0; i < n; ++i) {
            auto ls = rd.next();
            const int line = rd.lineno();
            const int idx = expect<int>(ls, "edge index", line);
            if (idx < 0 || idx >= n)
                throw ParseError("line " + std::to_string(line) + ": edge index out of range");
            MeshEdge e;
            e.v0 = expect<int>(ls, "v0", line);
            e.v1 = expect<int>(ls, "v1", line);
            if (e.v0 < 0 || e.v1 < 0 ||
                e.v0 >= static_cast<int>(mesh.vertices.size()) ||
                e.v1 >= static_cast<int>(mesh.vertices.size()))
                throw ParseError("line " + std::to_string(line) + ": vertex out of range");
            e.tag = tag_from(expect<std::string>(ls, "tag", line), line);
            const auto g = expect<std::string>(ls, "geometry kind", line);
            if (g == "S") {
                e.geom = EdgeGeom::straight(mesh.vertices[e.v0], mesh.vertices[e.v1]);
            } else if (g == "C") {
                e.curve_name = expect<std::string>(ls, "curve name", line);
                auto it = mesh.curves.find(e.curve_name);
                if (it == mesh.curves.end())
                    throw ParseError("line " + std::to_string(line) +
                                     ": edge references undefined curve '" + e.curve_name +
                                     "'");
                const double t0 = expect<double>(ls, "t0", line);
                const double t1 = expect<double>(ls, "t1", line);
                const int orient = expect<int>(ls, "orientation", line);
                e.geom = EdgeGeom::curved(it->second, t0, t1, orient);
            } else {
                throw ParseError("line " + std::to_string(line) +
                                 ": edge geometry must be S or C");
            }
            mesh.edges[idx] = std::move(e);
        }
    }
    {
        auto ss = rd.next();
        std::string kw;
        ss >> kw;
        if (kw != "CELLS")
            throw ParseError("line " + std::to_string(rd.lineno()) + ": expected CELLS");
        const int n = expect<int>(ss, "cell count", rd.lineno());
        for (int i = 0; i < n; ++i) {
            auto ls = rd.next();
            const int line = rd.lineno();
            MeshCell c;
            c.region_id = expect<int>(ls, "region id", line);
            const int m = expect<int>(ls, "edge count", line);
            for (int j = 0; j < m; ++j) {
                const int se = expect<int>(ls, "signed edge", line);
                if (se == 0 || std::abs(se) > static_cast<int>(mesh.edges.size()))
                    throw ParseError("line " + std::to_string(line) +
                                     ": signed edge index out of range");
                c.loop.push_back({std::abs(se) - 1, se > 0 ? 1.0 : -1.0});
            }
            mesh.cells.push_back(std::move(c));
        }
    }

    // Normalize clockwise single-chain cells to counterclockwise.
    for (int ci = 0; ci < static_cast<int>(mesh.cells.size()); ++ci) {
        MeshCell& c = mesh.cells[ci];
        bool single_chain = true;
        for (std::size_t j = 0; j + 1 < c.loop.size(); ++j)
            if (mesh.ref_end(c.loop[j]) != mesh.ref_start(c.loop[j + 1]))
                single_chain = false;
        if (!single_chain) continue;
        if (element_signed_area(mesh.cell_boundary(ci), 8) < 0.0) {
            std::reverse(c.loop.begin(), c.loop.end());
            for (SignedEdgeRef& r : c.loop) r.sign = -r.sign;
        }
    }
    return mesh;
}

Mesh load_mesh(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ParseError("cannot open '" + path + "'");
    return read_mesh(is);
}

}  // namespace curvem
