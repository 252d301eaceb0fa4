#pragma once

#include <Eigen/Dense>

#include "curvem/geometry.hpp"

namespace curvem {

/// pi_n = dim P_n in 2D; pi_{-1} = 0.
inline int poly_space_dim(int n) { return n < 0 ? 0 : (n + 1) * (n + 2) / 2; }

/// Graded lexicographic monomial order with x before y:
/// 1; x, y; x^2, xy, y^2; ...  Index 0 is the constant.
int monomial_index(int ax, int ay);
std::pair<int, int> monomial_exponents(int index);

/// Scaled monomial basis {((x-xc)/h)^ax ((y-yc)/h)^ay, ax+ay <= degree}.
struct ScaledBasis {
    Vec2 center = Vec2::Zero();
    double scale = 1.0;
    int degree = 0;
    int size() const { return poly_space_dim(degree); }
};

double monomial_eval(const ScaledBasis& basis, int index, const Vec2& p);

/// Coefficient vectors in the graded-lex basis. Vector-valued polynomials
/// stack the x-component block over the y-component block, matching the
/// vector monomial basis {(m_r,0)} u {(0,m_s)}.
using PolyCoeffs = Eigen::VectorXd;
using VectorPolyCoeffs = Eigen::VectorXd;

double poly_eval(const ScaledBasis& basis, const PolyCoeffs& coeffs, const Vec2& p);
Vec2 vector_poly_eval(const ScaledBasis& basis, const VectorPolyCoeffs& coeffs,
                      const Vec2& p);

/// d/dx and d/dy as coefficient maps degree n -> n-1 (exact, factor 1/h).
PolyCoeffs poly_dx(const PolyCoeffs& coeffs, int degree, double scale);
PolyCoeffs poly_dy(const PolyCoeffs& coeffs, int degree, double scale);

/// Exact gradient of the index-th scaled monomial of `basis`, returned as a
/// vector polynomial of degree basis.degree - 1.
VectorPolyCoeffs monomial_grad(const ScaledBasis& basis, int index);

/// div(v) for v of degree n, returned with degree n-1 layout.
PolyCoeffs vector_poly_divergence(const VectorPolyCoeffs& coeffs, int degree,
                                  double scale);

/// Product of scalar polynomials of degrees da, db (same basis).
PolyCoeffs poly_multiply(const PolyCoeffs& a, int da, const PolyCoeffs& b, int db);

/// Splitting of [P_n]^2 = grad P_{n+1} (+) x-perp P_{n-1} in the scaled
/// basis, m-perp = ((y-y_E)/h_E, -(x-x_E)/h_E).
struct Decomposition {
    /// Coefficients of p_{n+1} in M_{n+1}(E); the constant slot is zero.
    PolyCoeffs grad_part;
    /// Coefficients g_l against m-perp * m_l, l over M_{n-1}(E).
    PolyCoeffs perp_part;
};

Decomposition decompose_vector_poly(const VectorPolyCoeffs& v, int degree,
                                    double scale);

/// Rebuild grad(p_{n+1}) + sum_l g_l m-perp m_l in the degree-n layout.
VectorPolyCoeffs reassemble_decomposition(const Decomposition& dec, int degree,
                                          double scale);

/// Coefficients of m-perp * m_l as a vector polynomial of degree deg(m_l)+1.
VectorPolyCoeffs mperp_times_monomial(int l, int out_degree);

/// Integrals of scaled monomials over a curved polygon, up to a total
/// degree; every element mass matrix is assembled from this table.
class MonomialMoments {
public:
    MonomialMoments(const CellBoundary& boundary, const Vec2& center, double scale,
                    int max_degree, int n_gauss);

    double integral(int ax, int ay) const;
    double integral(int index) const { return values_(index); }
    int max_degree() const { return max_degree_; }

private:
    int max_degree_;
    Eigen::VectorXd values_;
};

/// H_{ij} = int_E m_i m_j dE for i < pi_rows, j < pi_cols.
Eigen::MatrixXd mass_matrix_from_moments(const MonomialMoments& moments,
                                         int deg_rows, int deg_cols);

/// Symmetric positive definite element mass matrix on M_n(E); throws
/// NotSPD if the Cholesky check fails.
Eigen::MatrixXd mass_matrix_element(const ScaledBasis& basis,
                                    const CellBoundary& boundary, int n_gauss);

/// Edge mass matrix of the mapped monomial basis,
/// M_{ij} = int_e m~_i m~_j de against arc length; SPD of size k+1.
Eigen::MatrixXd mass_matrix_edge(const EdgeGeom& edge, int k, int n_gauss);

/// Scaled monomial on the edge's parameter interval.
double edge_monomial_eval(const EdgeGeom& edge, int i, double t);

}  // namespace curvem
