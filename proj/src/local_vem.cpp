#include "curvem/local_vem.hpp"

#include <cmath>

#include "curvem/log.hpp"

namespace curvem {

namespace {

// Quadrature point data for one edge: parameter, physical point,
// derivative, weight (on dt, no arc-length factor).
struct EdgeQuadPoint {
    double t;
    Vec2 x;
    Vec2 dx;
    double w;
};

std::vector<EdgeQuadPoint> edge_quad(const EdgeGeom& geom, int n_gauss) {
    const QuadratureRule& rule = gauss_legendre(n_gauss);
    const Interval iv = geom.param();
    const double half = 0.5 * iv.length();
    std::vector<EdgeQuadPoint> pts(n_gauss);
    for (int q = 0; q < n_gauss; ++q) {
        const double t = iv.midpoint() + half * rule.nodes[q];
        pts[q] = {t, geom.eval(t), geom.deriv(t), half * rule.weights[q]};
    }
    return pts;
}

}  // namespace

ElementVem::ElementVem(const Mesh& mesh, int cell, int k, int n_gauss_override)
    : k_(k), n_gauss_(n_gauss_override > 0 ? n_gauss_override : k + 4),
      bulk_order_(2 * n_gauss_ - 4) {
    if (k < 0) throw IndexOutOfRange("polynomial degree must be >= 0");
    const MeshCell& mc = mesh.cells[cell];
    region_ = mc.region_id;
    for (const SignedEdgeRef& r : mc.loop) {
        geoms_.push_back(mesh.edges[r.edge].geom);
        signs_.push_back(r.sign);
        tags_.push_back(mesh.edges[r.edge].tag);
        data_geoms_.push_back(mesh.edges[r.edge].data_geom);
    }
    layout_ = {k_, static_cast<int>(geoms_.size())};

    measures_ = element_measures(boundary(), n_gauss_);
    basis_ = {measures_.centroid, measures_.diameter, k_};

    arclen_.resize(geoms_.size());
    for (std::size_t e = 0; e < geoms_.size(); ++e)
        arclen_[e] = edge_arclength(geoms_[e], n_gauss_);

    moments_ = std::make_unique<MonomialMoments>(boundary(), basis_.center,
                                                 basis_.scale, 2 * k_ + 2, n_gauss_);
    H_ = mass_matrix_from_moments(*moments_, k_, k_);
    H_llt_.compute(H_);
    if (H_llt_.info() != Eigen::Success)
        throw NotSPD("element monomial mass matrix is not SPD");
    H_k_kp1_ = mass_matrix_from_moments(*moments_, k_, k_ + 1);

    const Eigen::VectorXd ldiag = H_llt_.matrixL().toDenseMatrix().diagonal();
    const double cond_proxy = std::pow(ldiag.maxCoeff() / ldiag.minCoeff(), 2);
    if (cond_proxy > 1e12)
        log::warn("element mass matrix badly conditioned (proxy %.3e)", cond_proxy);

    edge_to_coeff_.resize(geoms_.size());
    for (std::size_t e = 0; e < geoms_.size(); ++e) {
        const Eigen::MatrixXd M = mass_matrix_edge(geoms_[e], k_, n_gauss_);
        edge_to_coeff_[e] =
            arclen_[e] * M.llt().solve(Eigen::MatrixXd::Identity(k_ + 1, k_ + 1));
    }

    build_reconstruction();
}

CellBoundary ElementVem::boundary() const {
    CellBoundary b;
    for (std::size_t e = 0; e < geoms_.size(); ++e) b.push_back({&geoms_[e], signs_[e]});
    return b;
}

void ElementVem::build_reconstruction() {
    const int N = layout_.total();
    const int pk = poly_space_dim(k_);
    const int pkm1 = poly_space_dim(k_ - 1);

    // Moments of div w against M_k(E) as a linear map of the DoFs: the
    // constant row is the boundary flux, the rest rescale D2.
    Mdiv_ = Eigen::MatrixXd::Zero(pk, N);
    for (int e = 0; e < layout_.n_edges; ++e)
        Mdiv_(0, layout_.d1_index(e, 0)) = signs_[e] * arclen_[e];
    for (int j = 1; j < pk; ++j)
        Mdiv_(j, layout_.d2_index(j)) = measures_.area / measures_.diameter;
    DIV_ = H_llt_.solve(Mdiv_);
    B_ = -Mdiv_;
    for (int j = 0; j < pk; ++j)
        if (B_.row(j).norm() == 0.0)
            throw RankDeficientB("zero row in the divergence coupling");

    // Projector: right-hand sides int_E w . m_s assembled per vector
    // monomial through the grad/perp decomposition and integration by parts.
    Eigen::MatrixXd R = Eigen::MatrixXd::Zero(2 * pk, N);
    std::vector<std::vector<EdgeQuadPoint>> equads(geoms_.size());
    for (std::size_t e = 0; e < geoms_.size(); ++e)
        equads[e] = edge_quad(geoms_[e], n_gauss_);

    ScaledBasis basis_kp1{basis_.center, basis_.scale, k_ + 1};
    for (int s = 0; s < 2 * pk; ++s) {
        VectorPolyCoeffs ms = VectorPolyCoeffs::Zero(2 * pk);
        ms(s) = 1.0;
        const Decomposition dec = decompose_vector_poly(ms, k_, basis_.scale);

        // boundary term: sum_e sigma sum_rho c_rho int_e m~_rho p_{k+1} de
        for (int e = 0; e < layout_.n_edges; ++e) {
            Eigen::VectorXd b = Eigen::VectorXd::Zero(k_ + 1);
            for (const EdgeQuadPoint& q : equads[e]) {
                const double pval = poly_eval(basis_kp1, dec.grad_part, q.x);
                const double ds = q.w * q.dx.norm() * pval;
                for (int rho = 0; rho <= k_; ++rho)
                    b(rho) += ds * edge_monomial_eval(geoms_[e], rho, q.t);
            }
            R.row(s).segment(layout_.d1_index(e, 0), k_ + 1) +=
                signs_[e] * (b.transpose() * edge_to_coeff_[e]);
        }
        // bulk term: - sum_theta d_theta int_E m_theta p_{k+1} dE
        Eigen::VectorXd wb = H_k_kp1_ * dec.grad_part;
        R.row(s) -= wb.transpose() * DIV_;
        // interior term: |E| sum_l g_l D3^l
        for (int l = 0; l < pkm1; ++l)
            R(s, layout_.d3_index(l)) += measures_.area * dec.perp_part(l);
    }
    P_.resize(2 * pk, N);
    P_.topRows(pk) = H_llt_.solve(R.topRows(pk));
    P_.bottomRows(pk) = H_llt_.solve(R.bottomRows(pk));
    if (!P_.allFinite()) throw SingularGram("projector solve produced non-finite values");

    // DoFs of the vector monomials.
    D_ = Eigen::MatrixXd::Zero(N, 2 * pk);
    for (int xi = 0; xi < 2 * pk; ++xi) {
        VectorPolyCoeffs mxi = VectorPolyCoeffs::Zero(2 * pk);
        mxi(xi) = 1.0;
        for (int e = 0; e < layout_.n_edges; ++e) {
            for (const EdgeQuadPoint& q : equads[e]) {
                const Vec2 nd = rotate_cw(q.dx);  // normal times |gamma'|
                const double flux = q.w * vector_poly_eval(basis_, mxi, q.x).dot(nd);
                for (int i = 0; i <= k_; ++i)
                    D_(layout_.d1_index(e, i), xi) +=
                        flux * edge_monomial_eval(geoms_[e], i, q.t) / arclen_[e];
            }
        }
        const PolyCoeffs div_mxi = vector_poly_divergence(mxi, k_, basis_.scale);
        for (int j = 1; j < pk; ++j) {
            double v = 0.0;
            for (int t = 0; t < div_mxi.size(); ++t) {
                if (div_mxi(t) == 0.0) continue;
                const auto [tx, ty] = monomial_exponents(t);
                const auto [jx, jy] = monomial_exponents(j);
                v += div_mxi(t) * moments_->integral(tx + jx, ty + jy);
            }
            D_(layout_.d2_index(j), xi) = v * measures_.diameter / measures_.area;
        }
        const int np = pk;
        for (int l = 0; l < pkm1; ++l) {
            const VectorPolyCoeffs ml = mperp_times_monomial(l, k_);
            // dot product of two vector polynomials, integrated exactly
            PolyCoeffs prod =
                poly_multiply(mxi.head(np), k_, ml.head(np), k_) +
                poly_multiply(mxi.tail(np), k_, ml.tail(np), k_);
            double v = 0.0;
            for (int t = 0; t < prod.size(); ++t) {
                if (prod(t) == 0.0) continue;
                const auto [tx, ty] = monomial_exponents(t);
                v += prod(t) * moments_->integral(tx, ty);
            }
            D_(layout_.d3_index(l), xi) = v / measures_.area;
        }
    }
}

PolyCoeffs ElementVem::edge_normal_poly_from_dofs(
    int edge_local, const Eigen::VectorXd& d1_block) const {
    return edge_to_coeff_[edge_local] * d1_block;
}

PolyCoeffs ElementVem::divergence_poly_from_dofs(const Eigen::VectorXd& dofs) const {
    return DIV_ * dofs;
}

Eigen::MatrixXd ElementVem::stabilization_matrix() const {
    return measures_.area *
           Eigen::MatrixXd::Identity(layout_.total(), layout_.total());
}

double ElementVem::nu(const RegionCoeff& coeff) const {
    const Vec2 xc = measures_.centroid;
    return coeff.mu_at(xc) * 0.5 * coeff.kappa_at(xc).inverse().trace();
}

Eigen::MatrixXd ElementVem::weighted_vector_mass(const RegionCoeff& coeff) const {
    const int pk = poly_space_dim(k_);
    Eigen::MatrixXd C(2 * pk, 2 * pk);
    if (coeff.constant()) {
        const Eigen::Matrix2d W = coeff.mu * coeff.kappa.inverse();
        C.topLeftCorner(pk, pk) = W(0, 0) * H_;
        C.topRightCorner(pk, pk) = W(0, 1) * H_;
        C.bottomLeftCorner(pk, pk) = W(1, 0) * H_;
        C.bottomRightCorner(pk, pk) = W(1, 1) * H_;
        return C;
    }
    const CellBoundary b = boundary();
    for (int s = 0; s < 2 * pk; ++s) {
        for (int z = s; z < 2 * pk; ++z) {
            VectorPolyCoeffs ms = VectorPolyCoeffs::Zero(2 * pk);
            VectorPolyCoeffs mz = VectorPolyCoeffs::Zero(2 * pk);
            ms(s) = 1.0;
            mz(z) = 1.0;
            const double v = element_bulk_integral(
                b,
                [&](const Vec2& x) {
                    const Eigen::Matrix2d W = coeff.mu_at(x) * coeff.kappa_at(x).inverse();
                    return vector_poly_eval(basis_, ms, x)
                        .dot(W * vector_poly_eval(basis_, mz, x));
                },
                bulk_order_, measures_.centroid);
            C(s, z) = v;
            C(z, s) = v;
        }
    }
    return C;
}

Eigen::MatrixXd ElementVem::local_a_matrix(const RegionCoeff& coeff) const {
    const int N = layout_.total();
    const Eigen::MatrixXd C = weighted_vector_mass(coeff);
    const Eigen::MatrixXd consistency = P_.transpose() * C * P_;
    const Eigen::MatrixXd I_minus_DP = Eigen::MatrixXd::Identity(N, N) - D_ * P_;
    return consistency +
           nu(coeff) * measures_.area * (I_minus_DP.transpose() * I_minus_DP);
}

Eigen::VectorXd ElementVem::local_rhs_f(
    const std::function<double(const Vec2&)>& f) const {
    const int pk = poly_space_dim(k_);
    Eigen::VectorXd rhs(pk);
    const CellBoundary b = boundary();
    for (int j = 0; j < pk; ++j)
        rhs(j) = element_bulk_integral(
            b, [&](const Vec2& x) { return f(x) * monomial_eval(basis_, j, x); },
            bulk_order_, measures_.centroid);
    return rhs;
}

Eigen::VectorXd ElementVem::local_rhs_g(
    const std::function<double(const Vec2&)>& pbar) const {
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(layout_.total());
    for (int e = 0; e < layout_.n_edges; ++e) {
        if (tags_[e] != EdgeTag::Natural) continue;
        // On straightened edges the pressure data stays attached to the
        // physical curve and is sampled through the parameter map.
        const EdgeGeom* data = data_geoms_[e] ? data_geoms_[e].get() : nullptr;
        const Interval iv = geoms_[e].param();
        const Interval div = data ? data->param() : iv;
        Eigen::VectorXd mom = Eigen::VectorXd::Zero(k_ + 1);
        for (const EdgeQuadPoint& q : edge_quad(geoms_[e], n_gauss_)) {
            Vec2 xdata = q.x;
            if (data) {
                const double u =
                    div.a + (q.t - iv.a) / iv.length() * div.length();
                xdata = data->eval(u);
            }
            const double ds = q.w * q.dx.norm() * pbar(xdata);
            for (int rho = 0; rho <= k_; ++rho)
                mom(rho) += ds * edge_monomial_eval(geoms_[e], rho, q.t);
        }
        rhs.segment(layout_.d1_index(e, 0), k_ + 1) =
            -signs_[e] * (edge_to_coeff_[e].transpose() * mom);
    }
    return rhs;
}

Eigen::VectorXd ElementVem::fortin_interpolate(
    const std::function<Vec2(const Vec2&)>& w,
    const std::function<double(const Vec2&)>& div_w) const {
    Eigen::VectorXd dofs = Eigen::VectorXd::Zero(layout_.total());
    for (int e = 0; e < layout_.n_edges; ++e) {
        for (const EdgeQuadPoint& q : edge_quad(geoms_[e], n_gauss_)) {
            const double flux = q.w * w(q.x).dot(rotate_cw(q.dx));
            for (int i = 0; i <= k_; ++i)
                dofs(layout_.d1_index(e, i)) +=
                    flux * edge_monomial_eval(geoms_[e], i, q.t) / arclen_[e];
        }
    }
    const int pk = poly_space_dim(k_);
    const CellBoundary b = boundary();
    for (int j = 1; j < pk; ++j) {
        const double v = element_bulk_integral(
            b, [&](const Vec2& x) { return div_w(x) * monomial_eval(basis_, j, x); },
            bulk_order_, measures_.centroid);
        dofs(layout_.d2_index(j)) = v * measures_.diameter / measures_.area;
    }
    for (int l = 0; l < poly_space_dim(k_ - 1); ++l) {
        const VectorPolyCoeffs ml = mperp_times_monomial(l, k_);
        const double v = element_bulk_integral(
            b,
            [&](const Vec2& x) { return w(x).dot(vector_poly_eval(basis_, ml, x)); },
            bulk_order_, measures_.centroid);
        dofs(layout_.d3_index(l)) = v / measures_.area;
    }
    return dofs;
}

PolyCoeffs ElementVem::project_scalar(
    const std::function<double(const Vec2&)>& g) const {
    const int pk = poly_space_dim(k_);
    Eigen::VectorXd mom(pk);
    const CellBoundary b = boundary();
    for (int j = 0; j < pk; ++j)
        mom(j) = element_bulk_integral(
            b, [&](const Vec2& x) { return g(x) * monomial_eval(basis_, j, x); },
            bulk_order_, measures_.centroid);
    return H_llt_.solve(mom);
}

double ElementVem::bulk_integral(const std::function<double(const Vec2&)>& f,
                                 int order) const {
    return element_bulk_integral(boundary(), f, order, measures_.centroid);
}

LocalMatrices ElementVem::local_matrices(
    const RegionCoeff& coeff, const std::function<double(const Vec2&)>& f,
    const std::function<double(const Vec2&)>& pbar) const {
    LocalMatrices lm;
    lm.P = P_;
    lm.S = stabilization_matrix();
    lm.A = local_a_matrix(coeff);
    lm.B = B_;
    lm.rhs_f = local_rhs_f(f);
    lm.rhs_g = local_rhs_g(pbar);
    return lm;
}

PolyCoeffs edge_l2_project(const EdgeGeom& edge,
                           const std::function<double(const Vec2&, double)>& g,
                           int k, int n_gauss) {
    const Eigen::MatrixXd M = mass_matrix_edge(edge, k, n_gauss);
    Eigen::VectorXd mom = Eigen::VectorXd::Zero(k + 1);
    const QuadratureRule& rule = gauss_legendre(n_gauss);
    const Interval iv = edge.param();
    const double half = 0.5 * iv.length();
    for (int q = 0; q < n_gauss; ++q) {
        const double t = iv.midpoint() + half * rule.nodes[q];
        const double ds = half * rule.weights[q] * edge.deriv(t).norm() * g(edge.eval(t), t);
        for (int i = 0; i <= k; ++i) mom(i) += ds * edge_monomial_eval(edge, i, t);
    }
    return M.llt().solve(mom);
}

}  // namespace curvem
