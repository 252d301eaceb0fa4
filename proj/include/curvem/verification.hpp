#pragma once

#include <iosfwd>

#include "curvem/solver.hpp"

namespace curvem {

/// A manufactured problem: mesh family builder, region classifier, exact
/// fields and coefficients. The source f is the closed form of -div q.
struct ManufacturedCase {
    std::string name;
    int n_regions = 1;
    std::function<Mesh(int)> build_mesh;
    std::function<int(const Vec2&)> region_of;
    std::function<double(const Vec2&, int)> pressure;
    std::function<Vec2(const Vec2&, int)> velocity;
    std::function<double(const Vec2&, int)> source;
    std::vector<RegionCoeff> coeff;

    ProblemData problem() const;
};

ManufacturedCase case_curved_boundary();
ManufacturedCase case_circle_inclusion();
ManufacturedCase case_double_interface();
/// Lookup by CLI name: curved-boundary, circle-inclusion, double-interface.
ManufacturedCase manufactured_case(const std::string& name);

/// Polynomial case on the unit square for patch tests: exact pressure of
/// the given degree with kappa = I, mu = 1.
ManufacturedCase case_polynomial_patch(int pressure_degree);

struct ConsistencyReport {
    double max_flux_residual = 0.0;  // ||mu q + kappa grad p|| by differences
    double max_mass_residual = 0.0;  // |div q + f| by differences
};

/// Samples the field equations at random interior points of every region
/// (difference stencils stay inside one region).
ConsistencyReport check_case_consistency(const ManufacturedCase& mc,
                                         int samples_per_region = 200,
                                         unsigned seed = 7);

/// e_q^2 = sum_E ||q - Pi q_h||_E^2 and e_p^2 = sum_E ||p - p_h||_E^2.
std::pair<double, double> compute_errors(const Mesh& mesh, const DofMap& map,
                                         const FieldEvaluation& fields,
                                         const ManufacturedCase& mc);

/// Same indicators for arbitrary per-cell fields (test seam: injecting the
/// exact solution must give zero to quadrature accuracy).
std::pair<double, double> compute_errors_fields(
    const Mesh& mesh, int k,
    const std::function<Vec2(const Vec2&, int)>& qh,
    const std::function<double(const Vec2&, int)>& ph,
    const ManufacturedCase& mc);

/// max over cells of |int_E div q_h + int_E f| (local mass conservation;
/// int_E Pi f equals int_E f by the projection property).
double max_conservation_residual(const Mesh& mesh, const DofMap& map,
                                 const Solution& sol, const ManufacturedCase& mc);

enum class GeoMode { WithGeo, NoGeo };

inline const char* geo_mode_name(GeoMode m) {
    return m == GeoMode::WithGeo ? "withgeo" : "nogeo";
}

struct ConvergenceRow {
    int n = 0;
    double h = 0.0;
    double e_q = 0.0;
    double e_p = 0.0;
    double rate_q = std::numeric_limits<double>::quiet_NaN();
    double rate_p = std::numeric_limits<double>::quiet_NaN();
    int ndof = 0;
    double seconds = 0.0;
    double conservation = 0.0;
    double infsup = 0.0;
};

struct ConvergenceReport {
    std::string case_name;
    GeoMode mode = GeoMode::WithGeo;
    int k = 0;
    std::vector<ConvergenceRow> rows;
};

struct RunOptions {
    bool with_infsup = false;
    int jobs = 1;
};

struct SolveSummary {
    double e_q = 0.0;
    double e_p = 0.0;
    int ndof = 0;
    double h = 0.0;
    double conservation = 0.0;
    double infsup = 0.0;
    double residual = 0.0;
};

/// One manufactured solve on an existing mesh.
SolveSummary solve_case_on_mesh(const ManufacturedCase& mc, const Mesh& mesh, int k,
                                bool with_infsup = false);

/// Mesh sequence study: builds the case meshes (straightened for NoGeo),
/// solves, and reports errors with observed rates between consecutive rows.
ConvergenceReport run_convergence(const ManufacturedCase& mc,
                                  const std::vector<int>& sizes, int k, GeoMode mode,
                                  const RunOptions& options = {});

/// CSV rows: mode,k,h,e_q,e_p,rate_q,rate_p,ndof,seconds with 17
/// significant digits.
void write_csv(const ConvergenceReport& report, std::ostream& os);

}  // namespace curvem
