#include <doctest.h>

#include <cmath>

#include "curvem/local_vem.hpp"
#include "curvem/log.hpp"
#include "helpers.hpp"

using namespace curvem;
using namespace curvem::testing;

namespace {

const double kPi = EIGEN_PI;

Mesh half_disk_mesh(double R) {
    auto circle = std::make_shared<ParametricCurve>(make_circle_curve(Vec2(0, 0), R));
    TestCell cell;
    cell.edges.push_back(EdgeGeom::straight(Vec2(-R, 0), Vec2(R, 0)));
    cell.edges.push_back(EdgeGeom::curved(circle, 0.0, kPi, +1));
    return single_cell_mesh(cell);
}

// DoFs of a vector polynomial through the DoF-of-polynomial matrix.
Eigen::VectorXd poly_dofs(const ElementVem& elem, const VectorPolyCoeffs& coeffs) {
    return elem.dof_of_poly_matrix() * coeffs;
}

}  // namespace

TEST_CASE("dof layout dimension formula") {
    for (int k = 0; k <= 4; ++k)
        for (int ne = 3; ne <= 6; ++ne) {
            const DofLayout layout{k, ne};
            CHECK(layout.total() ==
                  ne * (k + 1) + (poly_space_dim(k) - 1) + poly_space_dim(k - 1));
        }
    CHECK(DofLayout{0, 4}.total() == 4);
    CHECK(DofLayout{1, 4}.total() == 8 + 2 + 1);
}

TEST_CASE("edge normal reconstruction at k=1 and round trip at k=3") {
    const Mesh square = build_square_grid(1, 0.0, 1.0);
    {
        const ElementVem elem(square, 0, 1);
        Eigen::VectorXd d1 = Eigen::VectorXd::Zero(2);
        d1(0) = 1.0;
        const PolyCoeffs c = elem.edge_normal_poly_from_dofs(0, d1);
        CHECK(c(0) == doctest::Approx(1.0).epsilon(1e-13));
        CHECK(c(1) == doctest::Approx(0.0).epsilon(1e-13));
        CHECK(elem.edge_normal_poly_from_dofs(0, Eigen::VectorXd::Zero(2)).norm() ==
              doctest::Approx(0.0));
    }
    {
        const ElementVem elem(square, 0, 3);
        std::mt19937 rng(2);
        std::uniform_real_distribution<double> uc(-1, 1);
        Eigen::VectorXd c(4);
        for (int i = 0; i < 4; ++i) c(i) = uc(rng);
        // moments of w.n = sum c m~ then reconstruct
        const EdgeGeom& e = elem.edge(0);
        Eigen::VectorXd d1 = Eigen::VectorXd::Zero(4);
        for (int i = 0; i < 4; ++i) {
            auto f = [&](const Vec2&, double t) {
                double wn = 0.0;
                for (int rho = 0; rho < 4; ++rho)
                    wn += c(rho) * edge_monomial_eval(e, rho, t);
                return wn * edge_monomial_eval(e, i, t);
            };
            d1(i) = edge_integral(e, f, 8) / elem.edge_arclen(0);
        }
        const PolyCoeffs back = elem.edge_normal_poly_from_dofs(0, d1);
        CHECK((back - c).lpNorm<Eigen::Infinity>() <= 1e-12);
    }
}

TEST_CASE("divergence reconstruction") {
    const Mesh square = build_square_grid(1, 0.0, 1.0);
    for (int k = 0; k <= 3; ++k) {
        const ElementVem elem(square, 0, k);
        CHECK(elem.divergence_poly_from_dofs(
                      Eigen::VectorXd::Zero(elem.layout().total()))
                  .norm() == doctest::Approx(0.0));

        // w = ((x-x_E)/h_E, (y-y_E)/h_E): div = 2/h_E, constant
        const ScaledBasis& b = elem.basis();
        auto w = [&](const Vec2& p) { return Vec2((p - b.center) / b.scale); };
        auto divw = [&](const Vec2&) { return 2.0 / b.scale; };
        const Eigen::VectorXd dofs = elem.fortin_interpolate(w, divw);
        const PolyCoeffs d = elem.divergence_poly_from_dofs(dofs);
        CHECK(d(0) == doctest::Approx(2.0 / b.scale).epsilon(1e-12));
        for (int j = 1; j < d.size(); ++j)
            CHECK(std::abs(d(j)) <= 1e-12 / b.scale);
    }
}

TEST_CASE("divergence constant mode vanishes for zero total flux") {
    const Mesh square = build_square_grid(1, 0.0, 1.0);
    const ElementVem elem(square, 0, 2);
    Eigen::VectorXd dofs = Eigen::VectorXd::Zero(elem.layout().total());
    // equal-and-opposite constant moments on two opposite edges
    dofs(elem.layout().d1_index(0, 0)) = 1.0;
    dofs(elem.layout().d1_index(2, 0)) = 1.0;  // sigma = -1 on the top edge
    double flux = 0.0;
    for (int e = 0; e < 4; ++e)
        flux += elem.edge_sign(e) * elem.edge_arclen(e) *
                dofs(elem.layout().d1_index(e, 0));
    // choose the second value so the loop flux cancels exactly
    dofs(elem.layout().d1_index(2, 0)) -= flux / (elem.edge_sign(2) * elem.edge_arclen(2));
    const PolyCoeffs d = elem.divergence_poly_from_dofs(dofs);
    CHECK(std::abs(d(0)) <= 1e-13);
}

TEST_CASE("projector reproduces constants at k=0") {
    const Mesh square = build_square_grid(1, 0.0, 1.0);
    const ElementVem elem(square, 0, 0);
    VectorPolyCoeffs w = VectorPolyCoeffs::Zero(2);
    w(0) = 1.0;  // (1, 0)
    const Eigen::VectorXd dofs = poly_dofs(elem, w);
    const VectorPolyCoeffs proj = elem.projector_matrix() * dofs;
    CHECK((proj - w).lpNorm<Eigen::Infinity>() <= 1e-13);
}

TEST_CASE("projector reproduces a rotated linear field at k=1 on a triangle") {
    const TestCell tri = make_polygon({{0, 0}, {1, 0.1}, {0.2, 0.9}});
    const Mesh mesh = single_cell_mesh(tri);
    const ElementVem elem(mesh, 0, 1);
    // w = (y - y_E, -(x - x_E)) expressed in the scaled basis
    const double h = elem.basis().scale;
    const int np = poly_space_dim(1);
    VectorPolyCoeffs w = VectorPolyCoeffs::Zero(2 * np);
    w(monomial_index(0, 1)) = h;
    w(np + monomial_index(1, 0)) = -h;
    const Eigen::VectorXd dofs =
        elem.fortin_interpolate(
            [&](const Vec2& p) {
                return Vec2(p.y() - elem.basis().center.y(),
                            -(p.x() - elem.basis().center.x()));
            },
            [](const Vec2&) { return 0.0; });
    const VectorPolyCoeffs proj = elem.projector_matrix() * dofs;
    CHECK((proj - w).lpNorm<Eigen::Infinity>() <= 1e-11 * h);
}

TEST_CASE("polynomial consistency on straight cells: P D = I on [P_k]^2") {
    std::mt19937 rng(31);
    for (int k = 0; k <= 3; ++k) {
        for (int trial = 0; trial < 5; ++trial) {
            const TestCell cell = make_random_cell(rng, Vec2(0.2, 0.4), 1.0,
                                                   4 + trial % 3, false);
            const Mesh mesh = single_cell_mesh(cell);
            const ElementVem elem(mesh, 0, k);
            const Eigen::MatrixXd PD =
                elem.projector_matrix() * elem.dof_of_poly_matrix();
            const int n = 2 * poly_space_dim(k);
            CHECK((PD - Eigen::MatrixXd::Identity(n, n)).lpNorm<Eigen::Infinity>() <=
                  1e-11);
        }
    }
}

TEST_CASE("projection of a D3-only function is orthogonal to gradients") {
    const Mesh mesh = half_disk_mesh(0.45);
    const int k = 2;
    // The pi-long arc of this cell needs far more quadrature than the k+4
    // production default, both inside the element and in the oracle below.
    const ElementVem elem(mesh, 0, k, 24);
    const ScaledBasis& b = elem.basis();
    ScaledBasis bk1 = b;
    bk1.degree = k + 1;
    for (int l = 0; l < elem.layout().n_d3(); ++l) {
        Eigen::VectorXd dofs = Eigen::VectorXd::Zero(elem.layout().total());
        dofs(elem.layout().d3_index(l)) = 1.0;
        const VectorPolyCoeffs proj = elem.projector_matrix() * dofs;
        // brute-force moments of the projection against grad(m_alpha)
        for (int alpha = 1; alpha < poly_space_dim(k + 1); ++alpha) {
            const VectorPolyCoeffs g = monomial_grad(bk1, alpha);
            ScaledBasis bk = b;
            const double moment = elem.bulk_integral(
                [&](const Vec2& x) {
                    return vector_poly_eval(bk, proj, x).dot(vector_poly_eval(bk, g, x));
                },
                40);
            CHECK(std::abs(moment) <= 1e-11 * std::max(1.0, proj.norm()));
        }
    }
}

TEST_CASE("stabilization matrix is |E| times the identity") {
    const Mesh square = build_square_grid(1, 0.0, 1.0);
    const ElementVem elem(square, 0, 2);
    const Eigen::MatrixXd S = elem.stabilization_matrix();
    const int N = elem.layout().total();
    CHECK((S - Eigen::MatrixXd::Identity(N, N)).lpNorm<Eigen::Infinity>() <= 1e-14);

    const TestCell small = make_polygon({{0, 0}, {0.5, 0}, {0.5, 0.5}, {0, 0.5}});
    const ElementVem elem2(single_cell_mesh(small), 0, 1);
    CHECK(elem2.stabilization_matrix()(0, 0) == doctest::Approx(0.25).epsilon(1e-13));
}

TEST_CASE("local a matrix: consistency energy of constants") {
    const Mesh square = build_square_grid(1, 0.0, 1.0);
    for (int k = 0; k <= 2; ++k) {
        const ElementVem elem(square, 0, k);
        const RegionCoeff coeff;
        const Eigen::MatrixXd A = elem.local_a_matrix(coeff);
        const Eigen::VectorXd dofs = elem.fortin_interpolate(
            [](const Vec2&) { return Vec2(0.7, -0.4); }, [](const Vec2&) { return 0.0; });
        const double energy = dofs.dot(A * dofs);
        const double exact = 1.0 * (0.7 * 0.7 + 0.4 * 0.4);  // |E| ||w||^2
        CHECK(energy == doctest::Approx(exact).epsilon(1e-11));
        // the stabilization part vanishes on reconstructed polynomials
        const Eigen::MatrixXd I_DP =
            Eigen::MatrixXd::Identity(elem.layout().total(), elem.layout().total()) -
            elem.dof_of_poly_matrix() * elem.projector_matrix();
        CHECK((I_DP * dofs).norm() <= 1e-12 * dofs.norm());
    }
}

TEST_CASE("local a matrix is symmetric positive definite on curved cells") {
    std::mt19937 rng(41);
    for (int trial = 0; trial < 5; ++trial) {
        const TestCell cell = make_random_cell(rng, Vec2(0, 0), 1.0, 5, true);
        const ElementVem elem(single_cell_mesh(cell), 0, 2);
        const RegionCoeff coeff;
        const Eigen::MatrixXd A = elem.local_a_matrix(coeff);
        CHECK((A - A.transpose()).lpNorm<Eigen::Infinity>() <=
              1e-13 * A.lpNorm<Eigen::Infinity>());
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A);
        CHECK(es.eigenvalues().minCoeff() > 0.0);
    }
}

TEST_CASE("spatially varying coefficients match the exact path when constant") {
    std::mt19937 rng(83);
    RegionCoeff exact;
    exact.mu = 1.5;
    exact.kappa << 2.0, 0.3, 0.3, 1.0;
    RegionCoeff varying = exact;
    varying.mu_fn = [](const Vec2&) { return 1.5; };
    varying.kappa_fn = [](const Vec2&) {
        Eigen::Matrix2d k;
        k << 2.0, 0.3, 0.3, 1.0;
        return k;
    };
    {
        // straight cell: both paths integrate exactly
        const TestCell cell = make_random_cell(rng, Vec2(0.1, 0.2), 0.8, 5, false);
        const ElementVem elem(single_cell_mesh(cell), 0, 1);
        const Eigen::MatrixXd A1 = elem.local_a_matrix(exact);
        const Eigen::MatrixXd A2 = elem.local_a_matrix(varying);
        CHECK((A1 - A2).lpNorm<Eigen::Infinity>() <=
              1e-12 * A1.lpNorm<Eigen::Infinity>());
    }
    {
        // curved cell: paths agree up to bulk quadrature error
        const TestCell cell = make_random_cell(rng, Vec2(0.1, 0.2), 0.8, 5, true);
        const ElementVem elem(single_cell_mesh(cell), 0, 1);
        const Eigen::MatrixXd A1 = elem.local_a_matrix(exact);
        const Eigen::MatrixXd A2 = elem.local_a_matrix(varying);
        CHECK((A1 - A2).lpNorm<Eigen::Infinity>() <=
              1e-7 * A1.lpNorm<Eigen::Infinity>());
    }
}

TEST_CASE("nu(E) uses the centroid trace rule") {
    const Mesh square = build_square_grid(1, 0.0, 1.0);
    const ElementVem elem(square, 0, 0);
    RegionCoeff coeff;
    coeff.mu = 2.0;
    coeff.kappa = Eigen::Vector2d(0.5, 0.25).asDiagonal();
    CHECK(elem.nu(coeff) == doctest::Approx(2.0 * 0.5 * (2.0 + 4.0)).epsilon(1e-14));
}

TEST_CASE("local b matrix holds the divergence-theorem arithmetic at k=0") {
    const Mesh square = build_square_grid(1, 0.0, 1.0);
    const ElementVem elem(square, 0, 0);
    const Eigen::MatrixXd& B = elem.local_b_matrix();
    REQUIRE(B.rows() == 1);
    for (int e = 0; e < 4; ++e)
        CHECK(B(0, elem.layout().d1_index(e, 0)) ==
              doctest::Approx(-elem.edge_sign(e) * elem.edge_arclen(e)).epsilon(1e-13));
}

TEST_CASE("B against the Fortin dofs of (x, 0) integrates the divergence") {
    const Mesh square = build_square_grid(1, 0.0, 1.0);
    for (int k = 0; k <= 2; ++k) {
        const ElementVem elem(square, 0, k);
        const Eigen::VectorXd dofs = elem.fortin_interpolate(
            [](const Vec2& p) { return Vec2(p.x(), 0.0); },
            [](const Vec2&) { return 1.0; });
        const Eigen::VectorXd Bd = elem.local_b_matrix() * dofs;
        CHECK(Bd(0) == doctest::Approx(-1.0).epsilon(1e-12));  // -|E| div = -1
    }
}

TEST_CASE("local right-hand sides") {
    const Mesh square = build_square_grid(1, 0.0, 1.0);
    const ElementVem elem(square, 0, 1);
    const Eigen::VectorXd rf = elem.local_rhs_f([](const Vec2&) { return 1.0; });
    CHECK(rf(0) == doctest::Approx(1.0).epsilon(1e-13));

    // odd data about the centroid has zero constant moment
    const Eigen::VectorXd rodd =
        elem.local_rhs_f([&](const Vec2& p) { return p.x() - 0.5; });
    CHECK(std::abs(rodd(0)) <= 1e-14);

    // pbar = 1 on a natural edge: the first D1 dof of that edge gets -sigma h_e
    const Eigen::VectorXd rg = elem.local_rhs_g([](const Vec2&) { return 1.0; });
    for (int e = 0; e < 4; ++e) {
        CHECK(rg(elem.layout().d1_index(e, 0)) ==
              doctest::Approx(-elem.edge_sign(e) * elem.edge_arclen(e)).epsilon(1e-12));
        CHECK(std::abs(rg(elem.layout().d1_index(e, 1))) <= 1e-12);
    }
}

TEST_CASE("fortin interpolation: commuting on (x, y) and zero field") {
    const Mesh square = build_square_grid(1, 0.0, 1.0);
    for (int k = 0; k <= 2; ++k) {
        const ElementVem elem(square, 0, k);
        const Eigen::VectorXd dofs = elem.fortin_interpolate(
            [](const Vec2& p) { return p; }, [](const Vec2&) { return 2.0; });
        const PolyCoeffs d = elem.divergence_poly_from_dofs(dofs);
        CHECK(d(0) == doctest::Approx(2.0).epsilon(1e-12));
        for (int j = 1; j < d.size(); ++j) CHECK(std::abs(d(j)) <= 1e-12);

        CHECK(elem.fortin_interpolate([](const Vec2&) { return Vec2(0, 0); },
                                      [](const Vec2&) { return 0.0; })
                  .norm() == doctest::Approx(0.0));
    }
}

TEST_CASE("commuting diagram on random cells and smooth fields") {
    std::mt19937 rng(59);
    for (int k = 0; k <= 3; ++k) {
        for (int trial = 0; trial < 6; ++trial) {
            const TestCell cell =
                make_random_cell(rng, Vec2(0.1, -0.3), 0.9, 4 + trial % 3, trial % 2);
            const Mesh mesh = single_cell_mesh(cell);
            // high quadrature so the operator identity is tested, not the rule
            const ElementVem elem(mesh, 0, k, 16);
            const SmoothField f = make_random_field(rng);
            const Eigen::VectorXd dofs = elem.fortin_interpolate(f.w, f.div_w);
            const PolyCoeffs div_fortin = elem.divergence_poly_from_dofs(dofs);
            const PolyCoeffs div_proj = elem.project_scalar(f.div_w);
            CHECK((div_fortin - div_proj).lpNorm<Eigen::Infinity>() <=
                  1e-10 * std::max(1.0, div_proj.lpNorm<Eigen::Infinity>()));
        }
    }
}

TEST_CASE("edge L2 projection") {
    const EdgeGeom e = EdgeGeom::straight(Vec2(0, 0), Vec2(0.8, 0.3));
    {
        const PolyCoeffs c =
            edge_l2_project(e, [](const Vec2&, double) { return 1.0; }, 2, 8);
        CHECK(c(0) == doctest::Approx(1.0).epsilon(1e-13));
        CHECK(std::abs(c(1)) <= 1e-13);
        CHECK(std::abs(c(2)) <= 1e-13);
    }
    {
        const PolyCoeffs c = edge_l2_project(
            e, [&](const Vec2&, double t) { return edge_monomial_eval(e, 1, t); }, 2, 8);
        CHECK(c(1) == doctest::Approx(1.0).epsilon(1e-12));
    }
    {
        // best line to sin: the residual is orthogonal to m~_0, m~_1
        auto g = [](const Vec2&, double t) { return std::sin(3.0 * t); };
        const PolyCoeffs c = edge_l2_project(e, g, 1, 16);
        for (int i = 0; i <= 1; ++i) {
            auto resid = [&](const Vec2& p, double t) {
                double fit = 0.0;
                for (int r = 0; r <= 1; ++r) fit += c(r) * edge_monomial_eval(e, r, t);
                return (g(p, t) - fit) * edge_monomial_eval(e, i, t);
            };
            CHECK(std::abs(edge_integral(e, resid, 16)) <= 1e-12);
        }
    }
}

TEST_CASE("unisolvence: dof-to-reconstruction map has full rank") {
    std::mt19937 rng(67);
    for (int k = 0; k <= 2; ++k) {
        for (int trial = 0; trial < 10; ++trial) {
            const TestCell cell =
                make_random_cell(rng, Vec2(0, 0), 1.0, 4 + trial % 3, trial % 2);
            const ElementVem elem(single_cell_mesh(cell), 0, k);
            const DofLayout& lay = elem.layout();
            const int N = lay.total();
            const int rows = lay.n_edges * (k + 1) + poly_space_dim(k) + lay.n_d3();
            Eigen::MatrixXd M = Eigen::MatrixXd::Zero(rows, N);
            for (int s = 0; s < N; ++s) {
                Eigen::VectorXd dofs = Eigen::VectorXd::Zero(N);
                dofs(s) = 1.0;
                int r = 0;
                for (int e = 0; e < lay.n_edges; ++e) {
                    M.col(s).segment(r, k + 1) = elem.edge_normal_poly_from_dofs(
                        e, dofs.segment(lay.d1_index(e, 0), k + 1));
                    r += k + 1;
                }
                M.col(s).segment(r, poly_space_dim(k)) =
                    elem.divergence_poly_from_dofs(dofs);
                r += poly_space_dim(k);
                for (int l = 0; l < lay.n_d3(); ++l)
                    M(r + l, s) = dofs(lay.d3_index(l));
            }
            Eigen::JacobiSVD<Eigen::MatrixXd> svd(M);
            const auto& sv = svd.singularValues();
            CHECK(sv(sv.size() - 1) > 1e-10 * sv(0));
        }
    }
}

TEST_CASE("stabilization spectral monitor on straight cells (logged)") {
    std::mt19937 rng(71);
    for (int k = 0; k <= 2; ++k) {
        double worst_ratio = 0.0;
        for (int trial = 0; trial < 5; ++trial) {
            const TestCell cell = make_random_cell(rng, Vec2(0, 0), 1.0, 5, false);
            const ElementVem elem(single_cell_mesh(cell), 0, k);
            const Eigen::MatrixXd& D = elem.dof_of_poly_matrix();
            const Eigen::MatrixXd S = elem.stabilization_matrix();
            const int pk = poly_space_dim(k);
            Eigen::MatrixXd G = Eigen::MatrixXd::Zero(2 * pk, 2 * pk);
            G.topLeftCorner(pk, pk) = elem.mass_matrix();
            G.bottomRightCorner(pk, pk) = elem.mass_matrix();
            const Eigen::MatrixXd M1 = D.transpose() * S * D;
            Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> ges(M1, G);
            const double lo = ges.eigenvalues().minCoeff();
            const double hi = ges.eigenvalues().maxCoeff();
            CHECK(lo > 0.0);
            CHECK(std::isfinite(hi));
            worst_ratio = std::max(worst_ratio, hi / lo);
        }
        log::info("stabilization spectral ratio (k=%d): %.3e", k, worst_ratio);
    }
}
