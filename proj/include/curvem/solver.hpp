#pragma once

#include <Eigen/Sparse>

#include "curvem/local_vem.hpp"

namespace curvem {

/// Region-wise coefficients and data of one boundary value problem.
/// `source` and `boundary_pressure` receive the region id of the cell the
/// quadrature point belongs to.
struct ProblemData {
    std::vector<RegionCoeff> coeff;
    std::function<double(const Vec2&, int)> source;
    std::function<double(const Vec2&, int)> boundary_pressure;

    const RegionCoeff& region_coeff(int region) const {
        if (coeff.empty()) { static const RegionCoeff def; return def; }
        return coeff[std::min<std::size_t>(region, coeff.size() - 1)];
    }
};

/// Global numbering: shared edge D1 blocks first (essential edges are
/// excluded, their dofs vanish), then the per-cell D2/D3 blocks, then the
/// pressure moments per cell after all velocity unknowns.
struct DofMap {
    int k = 0;
    std::vector<int> edge_dof_start;      // -1 for essential edges
    std::vector<int> cell_aux_start;      // D2+D3 block per cell
    std::vector<int> cell_pressure_start; // relative to the pressure block
    int n_velocity = 0;
    int n_pressure = 0;
    int total() const { return n_velocity + n_pressure; }
};

DofMap build_dof_map(const Mesh& mesh, int k);

/// Local-to-global velocity indices for one cell, -1 on essential edges.
std::vector<int> cell_velocity_dofs(const Mesh& mesh, const DofMap& map, int cell);

struct AssembledSystem {
    Eigen::SparseMatrix<double> K;  // [[A, B^T], [B, 0]]
    Eigen::VectorXd rhs;
    Eigen::SparseMatrix<double> B;  // pressure x velocity coupling
    Eigen::VectorXd a_diag;         // diagonal of the velocity block
    Eigen::VectorXd mp_diag;        // diagonal of the pressure mass matrix
    DofMap map;
};

/// Assembles the saddle-point system. Throws EmptyNaturalBoundary when no
/// natural edge exists (the pressure would only be determined up to a
/// constant).
AssembledSystem assemble(const Mesh& mesh, const ProblemData& data, int k);

struct Solution {
    Eigen::VectorXd velocity;
    Eigen::VectorXd pressure;
    double residual = 0.0;
    int n_velocity = 0;
    int n_pressure = 0;
};

/// Direct sparse LU of the indefinite block system.
Solution solve(const AssembledSystem& system);

/// Piecewise polynomial view of the solution: projected velocity and
/// pressure coefficients per cell in the cell's scaled basis.
struct FieldEvaluation {
    std::vector<ScaledBasis> bases;              // degree k, per cell
    std::vector<VectorPolyCoeffs> velocity_proj; // 2 pi_k per cell
    std::vector<PolyCoeffs> pressure;            // pi_k per cell
};

FieldEvaluation evaluate(const Mesh& mesh, const DofMap& map, const Solution& sol);

/// Gather the local velocity DoF vector of a cell (essential entries 0).
Eigen::VectorXd gather_cell_velocity(const Mesh& mesh, const DofMap& map,
                                     const Solution& sol, int cell);

/// Smallest singular value of diag(M_p)^{-1/2} B diag(A)^{-1/2}, computed
/// by inverse power iteration on the scaled B B^T.
double infsup_monitor(const AssembledSystem& system);

}  // namespace curvem
