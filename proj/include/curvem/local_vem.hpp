#pragma once

#include <functional>

#include "curvem/mesh.hpp"
#include "curvem/poly.hpp"

namespace curvem {

/// Local degree-of-freedom layout for order k >= 0 on a cell with n_edges
/// edges: per-edge normal moments (D1, k+1 each, in cell loop order),
/// divergence moments against the non-constant monomials (D2), interior
/// moments against m-perp * M_{k-1} (D3).
struct DofLayout {
    int k = 0;
    int n_edges = 0;

    int edge_block() const { return k + 1; }
    int n_d1() const { return n_edges * (k + 1); }
    int n_d2() const { return poly_space_dim(k) - 1; }
    int n_d3() const { return poly_space_dim(k - 1); }
    int total() const { return n_d1() + n_d2() + n_d3(); }

    int d1_index(int edge_local, int i) const { return edge_local * (k + 1) + i; }
    /// j is the 0-based monomial index in M_k(E), j >= 1.
    int d2_index(int j) const { return n_d1() + (j - 1); }
    int d3_index(int l) const { return n_d1() + n_d2() + l; }
};

/// Physical coefficients on one mesh region. Constant tensors use exact
/// monomial integrals in the weighted velocity mass matrix; setting the
/// optional fields switches to bulk quadrature.
struct RegionCoeff {
    double mu = 1.0;
    Eigen::Matrix2d kappa = Eigen::Matrix2d::Identity();
    std::function<double(const Vec2&)> mu_fn;
    std::function<Eigen::Matrix2d(const Vec2&)> kappa_fn;

    double mu_at(const Vec2& x) const { return mu_fn ? mu_fn(x) : mu; }
    Eigen::Matrix2d kappa_at(const Vec2& x) const {
        return kappa_fn ? kappa_fn(x) : kappa;
    }
    bool constant() const { return !mu_fn && !kappa_fn; }
};

struct LocalMatrices {
    Eigen::MatrixXd P;      // 2 pi_k x N, DoFs -> projection coefficients
    Eigen::MatrixXd S;      // N x N stabilization, |E| I
    Eigen::MatrixXd A;      // N x N discrete form a_k^E
    Eigen::MatrixXd B;      // pi_k x N, B_{j,s} = -int div(phi_s) m_j
    Eigen::VectorXd rhs_f;  // pi_k, int f m_j
    Eigen::VectorXd rhs_g;  // N, -(pbar, phi_s . n) over natural edges
};

/// Per-element virtual element machinery. Construction precomputes the
/// geometry caches (monomial moments, edge mass matrices) and the
/// reconstruction operators; everything is then obtained by small dense
/// algebra. Quadrature uses k+4 Gauss points per edge unless overridden
/// (verification suites raise it to isolate operator identities from
/// quadrature error).
class ElementVem {
public:
    ElementVem(const Mesh& mesh, int cell, int k, int n_gauss_override = -1);

    const DofLayout& layout() const { return layout_; }
    const ElementMeasures& measures() const { return measures_; }
    const ScaledBasis& basis() const { return basis_; }
    int edge_gauss() const { return n_gauss_; }
    double edge_arclen(int edge_local) const { return arclen_[edge_local]; }
    double edge_sign(int edge_local) const { return signs_[edge_local]; }
    const EdgeGeom& edge(int edge_local) const { return geoms_[edge_local]; }
    EdgeTag edge_tag(int edge_local) const { return tags_[edge_local]; }
    int region() const { return region_; }
    CellBoundary boundary() const;

    /// Coefficients c of w . n^e = sum c_rho m~_rho from the edge's D1
    /// block: solves M~ c = h_e d1.
    PolyCoeffs edge_normal_poly_from_dofs(int edge_local,
                                          const Eigen::VectorXd& d1_block) const;

    /// Coefficients of div w in M_k(E) from the full DoF vector; the
    /// constant mode comes from the boundary flux.
    PolyCoeffs divergence_poly_from_dofs(const Eigen::VectorXd& dofs) const;

    const Eigen::MatrixXd& projector_matrix() const { return P_; }
    const Eigen::MatrixXd& divergence_matrix() const { return DIV_; }
    /// D_{s,xi} = D^s(m_xi): DoFs of the vector monomials.
    const Eigen::MatrixXd& dof_of_poly_matrix() const { return D_; }
    const Eigen::MatrixXd& local_b_matrix() const { return B_; }
    const Eigen::MatrixXd& mass_matrix() const { return H_; }

    Eigen::MatrixXd stabilization_matrix() const;
    double nu(const RegionCoeff& coeff) const;
    Eigen::MatrixXd weighted_vector_mass(const RegionCoeff& coeff) const;
    Eigen::MatrixXd local_a_matrix(const RegionCoeff& coeff) const;

    Eigen::VectorXd local_rhs_f(const std::function<double(const Vec2&)>& f) const;
    Eigen::VectorXd local_rhs_g(const std::function<double(const Vec2&)>& pbar) const;

    /// DoFs of an analytic field by the same quadrature rules.
    Eigen::VectorXd fortin_interpolate(
        const std::function<Vec2(const Vec2&)>& w,
        const std::function<double(const Vec2&)>& div_w) const;

    /// L2 projection of a scalar onto M_k(E) (used for pressure data).
    PolyCoeffs project_scalar(const std::function<double(const Vec2&)>& g) const;

    double bulk_integral(const std::function<double(const Vec2&)>& f,
                         int order) const;

    LocalMatrices local_matrices(const RegionCoeff& coeff,
                                 const std::function<double(const Vec2&)>& f,
                                 const std::function<double(const Vec2&)>& pbar) const;

private:
    void build_reconstruction();

    int k_;
    int n_gauss_;
    int bulk_order_;  // polynomial exactness degree of bulk data quadrature
    int region_ = 0;
    DofLayout layout_;
    ElementMeasures measures_;
    ScaledBasis basis_;

    std::vector<EdgeGeom> geoms_;
    std::vector<double> signs_;
    std::vector<double> arclen_;
    std::vector<EdgeTag> tags_;
    std::vector<std::shared_ptr<const EdgeGeom>> data_geoms_;  // boundary data maps

    std::unique_ptr<MonomialMoments> moments_;
    Eigen::MatrixXd H_;       // pi_k x pi_k
    Eigen::LLT<Eigen::MatrixXd> H_llt_;
    Eigen::MatrixXd H_k_kp1_; // pi_k x pi_{k+1}
    std::vector<Eigen::MatrixXd> edge_to_coeff_;  // C_e = h_e M~^-1 per edge

    Eigen::MatrixXd Mdiv_;  // pi_k x N, moments of div from DoFs
    Eigen::MatrixXd DIV_;   // H^-1 Mdiv
    Eigen::MatrixXd B_;     // -Mdiv
    Eigen::MatrixXd P_;     // projector
    Eigen::MatrixXd D_;     // DoFs of vector monomials
};

/// Pi~_0^k g on an edge: solves M~ c = (int_e g m~_i de)_i.
PolyCoeffs edge_l2_project(const EdgeGeom& edge,
                           const std::function<double(const Vec2&, double)>& g,
                           int k, int n_gauss);

}  // namespace curvem
