#include "curvem/solver.hpp"

#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>

#include "curvem/log.hpp"

namespace curvem {

DofMap build_dof_map(const Mesh& mesh, int k) {
    DofMap map;
    map.k = k;
    bool has_natural = false;
    for (const MeshEdge& e : mesh.edges)
        if (e.tag == EdgeTag::Natural) has_natural = true;
    if (!has_natural)
        throw EmptyNaturalBoundary(
            "no natural boundary edge; the pressure is determined only up to a constant");

    int next = 0;
    map.edge_dof_start.assign(mesh.edges.size(), -1);
    for (std::size_t e = 0; e < mesh.edges.size(); ++e) {
        if (mesh.edges[e].tag == EdgeTag::Essential) continue;
        map.edge_dof_start[e] = next;
        next += k + 1;
    }
    const int n_aux = (poly_space_dim(k) - 1) + poly_space_dim(k - 1);
    map.cell_aux_start.resize(mesh.cells.size());
    for (std::size_t c = 0; c < mesh.cells.size(); ++c) {
        map.cell_aux_start[c] = next;
        next += n_aux;
    }
    map.n_velocity = next;
    map.cell_pressure_start.resize(mesh.cells.size());
    for (std::size_t c = 0; c < mesh.cells.size(); ++c)
        map.cell_pressure_start[c] = static_cast<int>(c) * poly_space_dim(k);
    map.n_pressure = static_cast<int>(mesh.cells.size()) * poly_space_dim(k);
    return map;
}

std::vector<int> cell_velocity_dofs(const Mesh& mesh, const DofMap& map, int cell) {
    const MeshCell& mc = mesh.cells[cell];
    const int k = map.k;
    std::vector<int> idx;
    idx.reserve(mc.loop.size() * (k + 1) + 16);
    for (const SignedEdgeRef& r : mc.loop) {
        const int start = map.edge_dof_start[r.edge];
        for (int i = 0; i <= k; ++i) idx.push_back(start < 0 ? -1 : start + i);
    }
    const int n_aux = (poly_space_dim(k) - 1) + poly_space_dim(k - 1);
    for (int j = 0; j < n_aux; ++j) idx.push_back(map.cell_aux_start[cell] + j);
    return idx;
}

AssembledSystem assemble(const Mesh& mesh, const ProblemData& data, int k) {
    AssembledSystem sys;
    sys.map = build_dof_map(mesh, k);
    const int nv = sys.map.n_velocity;
    const int np = sys.map.n_pressure;
    const int pk = poly_space_dim(k);

    std::vector<Eigen::Triplet<double>> trip_K;
    std::vector<Eigen::Triplet<double>> trip_B;
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(nv + np);
    sys.mp_diag = Eigen::VectorXd::Zero(np);

    for (int c = 0; c < static_cast<int>(mesh.cells.size()); ++c) {
        const ElementVem elem(mesh, c, k);
        const int region = elem.region();
        const RegionCoeff& coeff = data.region_coeff(region);
        auto f = [&](const Vec2& x) { return data.source ? data.source(x, region) : 0.0; };
        auto pbar = [&](const Vec2& x) {
            return data.boundary_pressure ? data.boundary_pressure(x, region) : 0.0;
        };
        const LocalMatrices lm = elem.local_matrices(coeff, f, pbar);

        const std::vector<int> vdofs = cell_velocity_dofs(mesh, sys.map, c);
        const int N = static_cast<int>(vdofs.size());
        for (int a = 0; a < N; ++a) {
            if (vdofs[a] < 0) continue;
            rhs(vdofs[a]) += lm.rhs_g(a);
            for (int b = 0; b < N; ++b) {
                if (vdofs[b] < 0) continue;
                if (lm.A(a, b) != 0.0)
                    trip_K.emplace_back(vdofs[a], vdofs[b], lm.A(a, b));
            }
        }
        const int pstart = sys.map.cell_pressure_start[c];
        for (int j = 0; j < pk; ++j) {
            rhs(nv + pstart + j) += lm.rhs_f(j);
            sys.mp_diag(pstart + j) = elem.mass_matrix()(j, j);
            for (int b = 0; b < N; ++b) {
                if (vdofs[b] < 0 || lm.B(j, b) == 0.0) continue;
                trip_B.emplace_back(pstart + j, vdofs[b], lm.B(j, b));
                trip_K.emplace_back(nv + pstart + j, vdofs[b], lm.B(j, b));
                trip_K.emplace_back(vdofs[b], nv + pstart + j, lm.B(j, b));
            }
        }
    }

    sys.K.resize(nv + np, nv + np);
    sys.K.setFromTriplets(trip_K.begin(), trip_K.end());
    sys.B.resize(np, nv);
    sys.B.setFromTriplets(trip_B.begin(), trip_B.end());
    sys.rhs = std::move(rhs);
    sys.a_diag = sys.K.diagonal().head(nv);
    return sys;
}

Solution solve(const AssembledSystem& system) {
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    lu.compute(system.K);
    if (lu.info() != Eigen::Success)
        throw SingularSystem("sparse LU factorization of the saddle system failed");
    const Eigen::VectorXd x = lu.solve(system.rhs);
    if (lu.info() != Eigen::Success)
        throw SingularSystem("sparse LU back substitution failed");

    Solution sol;
    sol.n_velocity = system.map.n_velocity;
    sol.n_pressure = system.map.n_pressure;
    sol.velocity = x.head(sol.n_velocity);
    sol.pressure = x.tail(sol.n_pressure);
    const double rhs_norm = system.rhs.norm();
    sol.residual = (system.K * x - system.rhs).norm() / (rhs_norm > 0.0 ? rhs_norm : 1.0);
    if (sol.residual > 1e-6)
        throw SingularSystem("solver residual " + std::to_string(sol.residual));
    if (sol.residual > 1e-10)
        log::warn("solver residual %.3e above the 1e-10 contract", sol.residual);
    return sol;
}

Eigen::VectorXd gather_cell_velocity(const Mesh& mesh, const DofMap& map,
                                     const Solution& sol, int cell) {
    const std::vector<int> vdofs = cell_velocity_dofs(mesh, map, cell);
    Eigen::VectorXd local = Eigen::VectorXd::Zero(vdofs.size());
    for (std::size_t i = 0; i < vdofs.size(); ++i)
        if (vdofs[i] >= 0) local(i) = sol.velocity(vdofs[i]);
    return local;
}

FieldEvaluation evaluate(const Mesh& mesh, const DofMap& map, const Solution& sol) {
    FieldEvaluation out;
    const int pk = poly_space_dim(map.k);
    out.bases.reserve(mesh.cells.size());
    out.velocity_proj.reserve(mesh.cells.size());
    out.pressure.reserve(mesh.cells.size());
    for (int c = 0; c < static_cast<int>(mesh.cells.size()); ++c) {
        const ElementVem elem(mesh, c, map.k);
        out.bases.push_back(elem.basis());
        out.velocity_proj.push_back(elem.projector_matrix() *
                                    gather_cell_velocity(mesh, map, sol, c));
        out.pressure.push_back(
            sol.pressure.segment(map.cell_pressure_start[c], pk));
    }
    return out;
}

double infsup_monitor(const AssembledSystem& system) {
    // Scaled coupling Bhat = Dp^{-1/2} B Dv^{-1/2}; sigma_min via inverse
    // power iteration on Bhat Bhat^T (SPD for full row rank B).
    Eigen::VectorXd dv = system.a_diag.cwiseMax(1e-300).cwiseSqrt().cwiseInverse();
    Eigen::VectorXd dp = system.mp_diag.cwiseMax(1e-300).cwiseSqrt().cwiseInverse();
    Eigen::SparseMatrix<double> Bhat = dp.asDiagonal() * system.B * dv.asDiagonal();
    Eigen::SparseMatrix<double> BBt = (Bhat * Eigen::SparseMatrix<double>(Bhat.transpose())).pruned();

    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt;
    ldlt.compute(BBt);
    if (ldlt.info() != Eigen::Success)
        throw RankDeficientB("scaled B B^T is not positive definite");

    Eigen::VectorXd x = Eigen::VectorXd::Ones(BBt.rows()).normalized();
    double lambda = 0.0;
    for (int it = 0; it < 400; ++it) {
        Eigen::VectorXd y = ldlt.solve(x);
        const double ny = y.norm();
        if (ny == 0.0) throw RankDeficientB("inverse iteration collapsed");
        y /= ny;
        const double rq = y.dot(BBt * y);
        if (it > 4 && std::abs(rq - lambda) < 1e-9 * std::abs(rq)) {
            lambda = rq;
            break;
        }
        lambda = rq;
        x = y;
    }
    return std::sqrt(lambda);
}

}  // namespace curvem
