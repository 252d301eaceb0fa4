#pragma once

#include <functional>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "curvem/geometry.hpp"

namespace curvem {

enum class EdgeTag { Interior, Essential, Natural };

struct MeshEdge {
    EdgeGeom geom;
    int v0 = -1;
    int v1 = -1;
    EdgeTag tag = EdgeTag::Interior;
    std::string curve_name;  // registry key when curved, empty for straight

    /// Set by straighten() on formerly curved edges: the physical curve the
    /// chord approximates. Boundary data stays attached to the physical
    /// boundary and is pulled from it by parameter, which is exactly the
    /// straight-edge-interpolant approximation. Not serialized.
    std::shared_ptr<const EdgeGeom> data_geom;
};

/// Signed reference into Mesh::edges: sign +1 traverses v0 -> v1.
struct SignedEdgeRef {
    int edge = -1;
    double sign = 1.0;
};

/// Counterclockwise loop of signed edge references. Cells cut out by a
/// closed curve embedded in a single element carry a second (clockwise)
/// chain for the inner boundary.
struct MeshCell {
    std::vector<SignedEdgeRef> loop;
    int region_id = 0;
};

class Mesh {
public:
    std::vector<Vec2> vertices;
    std::vector<MeshEdge> edges;
    std::vector<MeshCell> cells;
    std::map<std::string, std::shared_ptr<const ParametricCurve>> curves;

    CellBoundary cell_boundary(int cell) const;
    ElementMeasures cell_measures(int cell, int n_gauss = 8) const;

    /// Signed start/end vertex of a traversal step.
    int ref_start(const SignedEdgeRef& r) const {
        return r.sign > 0 ? edges[r.edge].v0 : edges[r.edge].v1;
    }
    int ref_end(const SignedEdgeRef& r) const {
        return r.sign > 0 ? edges[r.edge].v1 : edges[r.edge].v0;
    }

    double bbox_diameter() const;
};

struct MeshQualityReport {
    double h = 0.0;               // mean element diameter
    double min_edge_ratio = 0.0;  // min over cells of min_e h_e / h_E
    std::vector<bool> star_ok;    // centroid star test per cell
    int cell_count = 0;
    int edge_count = 0;
};

/// n x n square grid covering [lo, hi]^2, straight edges, boundary natural.
Mesh build_square_grid(int n, double lo, double hi);

/// The deformed-square construction: an n x n grid on (0,1)^2 whose vertex
/// y-coordinates are remapped so the bottom and top rows land on the graphs
/// of g2 and g1; those boundary rows become curved edges referencing the
/// graphs. Interior edges stay straight. Throws InvertedCell if the
/// deformation flips a cell.
Mesh build_deformed_quad_mesh(int n, const ParametricCurve& g1_top,
                              const ParametricCurve& g2_bottom);

/// Map applied to vertices by build_deformed_quad_mesh (exposed for tests).
Vec2 deformed_quad_vertex_map(const Vec2& p, const std::function<double(double)>& g1,
                              const std::function<double(double)>& g2);

struct CutOptions {
    std::string curve_name = "cut";
    int scan_samples = 4096;        // curve sampling resolution for bracketing
    double snap_rel = 1e-9;         // vertex snap distance relative to local h
    /// Region id assigned at each cell centroid after cutting. When absent,
    /// a side test derived from the curve kind is used (inside for circles,
    /// above for graphs): region = 2 * old + side.
    std::optional<std::function<int(const Vec2&)>> classify;
};

/// Split every background cell crossed by the curve into two cells joined
/// by a new curved edge; a closed curve inside a single cell carves the
/// enclosed region out of it. Returns the input unchanged when the curve
/// misses the mesh.
Mesh cut_mesh_with_curve(const Mesh& mesh, const ParametricCurve& curve,
                         const CutOptions& options = {});

/// Replace every curved edge by the straight chord between its endpoints;
/// topology, tags and regions unchanged. Idempotent.
Mesh straighten(const Mesh& mesh);

/// Topological consistency plus the quality numbers. Throws TopologyError
/// for non-manifold incidence or open loops; never mutates.
MeshQualityReport validate(const Mesh& mesh);

/// region_id := classify(cell centroid) for every cell.
void assign_regions(Mesh& mesh, const std::function<int(const Vec2&)>& classify);

void set_boundary_tags(Mesh& mesh, EdgeTag tag);

void save_mesh(const Mesh& mesh, const std::string& path);
Mesh load_mesh(const std::string& path);
void write_mesh(const Mesh& mesh, std::ostream& os);
Mesh read_mesh(std::istream& is);

/// Field-for-field equality with bit-exact floats (round-trip checks).
bool meshes_equal(const Mesh& a, const Mesh& b);

}  // namespace curvem
