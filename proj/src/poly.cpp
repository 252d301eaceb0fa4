#include "curvem/poly.hpp"

#include <cmath>
#include <map>
#include <mutex>

namespace curvem {

int monomial_index(int ax, int ay) {
    if (ax < 0 || ay < 0) throw IndexOutOfRange("negative monomial exponent");
    const int d = ax + ay;
    return d * (d + 1) / 2 + ay;
}

std::pair<int, int> monomial_exponents(int index) {
    if (index < 0) throw IndexOutOfRange("negative monomial index");
    int d = 0;
    while ((d + 1) * (d + 2) / 2 <= index) ++d;
    const int ay = index - d * (d + 1) / 2;
    return {d - ay, ay};
}

double monomial_eval(const ScaledBasis& basis, int index, const Vec2& p) {
    if (index >= basis.size()) throw IndexOutOfRange("monomial index beyond basis");
    const auto [ax, ay] = monomial_exponents(index);
    const double xs = (p.x() - basis.center.x()) / basis.scale;
    const double ys = (p.y() - basis.center.y()) / basis.scale;
    return std::pow(xs, ax) * std::pow(ys, ay);
}

double poly_eval(const ScaledBasis& basis, const PolyCoeffs& coeffs, const Vec2& p) {
    const double xs = (p.x() - basis.center.x()) / basis.scale;
    const double ys = (p.y() - basis.center.y()) / basis.scale;
    double sum = 0.0;
    for (int i = 0; i < coeffs.size(); ++i) {
        if (coeffs(i) == 0.0) continue;
        const auto [ax, ay] = monomial_exponents(i);
        sum += coeffs(i) * std::pow(xs, ax) * std::pow(ys, ay);
    }
    return sum;
}

Vec2 vector_poly_eval(const ScaledBasis& basis, const VectorPolyCoeffs& coeffs,
                      const Vec2& p) {
    const int np = static_cast<int>(coeffs.size()) / 2;
    return Vec2(poly_eval(basis, coeffs.head(np), p),
                poly_eval(basis, coeffs.tail(np), p));
}

PolyCoeffs poly_dx(const PolyCoeffs& coeffs, int degree, double scale) {
    PolyCoeffs out = PolyCoeffs::Zero(poly_space_dim(degree - 1));
    for (int i = 0; i < coeffs.size(); ++i) {
        const auto [ax, ay] = monomial_exponents(i);
        if (ax > 0) out(monomial_index(ax - 1, ay)) += coeffs(i) * ax / scale;
    }
    return out;
}

PolyCoeffs poly_dy(const PolyCoeffs& coeffs, int degree, double scale) {
    PolyCoeffs out = PolyCoeffs::Zero(poly_space_dim(degree - 1));
    for (int i = 0; i < coeffs.size(); ++i) {
        const auto [ax, ay] = monomial_exponents(i);
        if (ay > 0) out(monomial_index(ax, ay - 1)) += coeffs(i) * ay / scale;
    }
    return out;
}

VectorPolyCoeffs monomial_grad(const ScaledBasis& basis, int index) {
    if (index >= basis.size()) throw IndexOutOfRange("monomial index beyond basis");
    const int nd = poly_space_dim(basis.degree - 1);
    VectorPolyCoeffs out = VectorPolyCoeffs::Zero(2 * nd);
    const auto [ax, ay] = monomial_exponents(index);
    if (ax > 0) out(monomial_index(ax - 1, ay)) = ax / basis.scale;
    if (ay > 0) out(nd + monomial_index(ax, ay - 1)) = ay / basis.scale;
    return out;
}

PolyCoeffs vector_poly_divergence(const VectorPolyCoeffs& coeffs, int degree,
                                  double scale) {
    const int np = poly_space_dim(degree);
    return poly_dx(coeffs.head(np), degree, scale) +
           poly_dy(coeffs.tail(np), degree, scale);
}

PolyCoeffs poly_multiply(const PolyCoeffs& a, int da, const PolyCoeffs& b, int db) {
    PolyCoeffs out = PolyCoeffs::Zero(poly_space_dim(da + db));
    for (int i = 0; i < a.size(); ++i) {
        if (a(i) == 0.0) continue;
        const auto [ax, ay] = monomial_exponents(i);
        for (int j = 0; j < b.size(); ++j) {
            if (b(j) == 0.0) continue;
            const auto [bx, by] = monomial_exponents(j);
            out(monomial_index(ax + bx, ay + by)) += a(i) * b(j);
        }
    }
    return out;
}

VectorPolyCoeffs mperp_times_monomial(int l, int out_degree) {
    const int np = poly_space_dim(out_degree);
    VectorPolyCoeffs out = VectorPolyCoeffs::Zero(2 * np);
    const auto [ax, ay] = monomial_exponents(l);
    out(monomial_index(ax, ay + 1)) = 1.0;        // eta * m_l in the x block
    out(np + monomial_index(ax + 1, ay)) = -1.0;  // -xi * m_l in the y block
    return out;
}

// ------------------------------------------------------- decomposition

namespace {

// Change of basis from {grad m_a : a in M_{n+1} \ M_0} u {m-perp m_l} to
// the vector monomials of degree n, built at unit scale. The grad block
// scales as 1/h, the perp block is scale free, so one factorization per
// degree serves every element.
struct DecompCache {
    Eigen::FullPivLU<Eigen::MatrixXd> lu;
};

const DecompCache& decomposition_cache(int degree) {
    static std::map<int, DecompCache> cache;
    static std::mutex mtx;
    std::lock_guard<std::mutex> lock(mtx);
    auto it = cache.find(degree);
    if (it != cache.end()) return it->second;

    const int n2 = 2 * poly_space_dim(degree);
    const int n_grad = poly_space_dim(degree + 1) - 1;
    const int n_perp = poly_space_dim(degree - 1);
    Eigen::MatrixXd T = Eigen::MatrixXd::Zero(n2, n_grad + n_perp);
    ScaledBasis unit{Vec2::Zero(), 1.0, degree + 1};
    for (int a = 1; a < poly_space_dim(degree + 1); ++a)
        T.col(a - 1) = monomial_grad(unit, a);
    for (int l = 0; l < n_perp; ++l)
        T.col(n_grad + l) = mperp_times_monomial(l, degree);

    DecompCache entry;
    entry.lu.compute(T);
    if (!entry.lu.isInvertible())
        throw SingularBasis("vector polynomial decomposition matrix is singular");
    it = cache.emplace(degree, std::move(entry)).first;
    return it->second;
}

}  // namespace

Decomposition decompose_vector_poly(const VectorPolyCoeffs& v, int degree,
                                    double scale) {
    const DecompCache& cache = decomposition_cache(degree);
    const Eigen::VectorXd x = cache.lu.solve(v);
    const int n_grad = poly_space_dim(degree + 1) - 1;
    Decomposition dec;
    dec.grad_part = PolyCoeffs::Zero(poly_space_dim(degree + 1));
    dec.grad_part.segment(1, n_grad) = scale * x.head(n_grad);
    dec.perp_part = x.tail(poly_space_dim(degree - 1));
    return dec;
}

VectorPolyCoeffs reassemble_decomposition(const Decomposition& dec, int degree,
                                          double scale) {
    const int np = poly_space_dim(degree);
    VectorPolyCoeffs out = VectorPolyCoeffs::Zero(2 * np);
    out.head(np) = poly_dx(dec.grad_part, degree + 1, scale);
    out.tail(np) = poly_dy(dec.grad_part, degree + 1, scale);
    for (int l = 0; l < dec.perp_part.size(); ++l)
        out += dec.perp_part(l) * mperp_times_monomial(l, degree);
    return out;
}

// ------------------------------------------------------- mass matrices

MonomialMoments::MonomialMoments(const CellBoundary& boundary, const Vec2& center,
                                 double scale, int max_degree, int n_gauss)
    : max_degree_(max_degree) {
    values_.resize(poly_space_dim(max_degree));
    for (int i = 0; i < values_.size(); ++i) {
        const auto [ax, ay] = monomial_exponents(i);
        values_(i) = element_monomial_integral(boundary, center, scale, ax, ay, n_gauss);
    }
}

double MonomialMoments::integral(int ax, int ay) const {
    if (ax + ay > max_degree_)
        throw IndexOutOfRange("monomial moment beyond precomputed degree");
    return values_(monomial_index(ax, ay));
}

Eigen::MatrixXd mass_matrix_from_moments(const MonomialMoments& moments,
                                         int deg_rows, int deg_cols) {
    const int nr = poly_space_dim(deg_rows);
    const int nc = poly_space_dim(deg_cols);
    Eigen::MatrixXd H(nr, nc);
    for (int i = 0; i < nr; ++i) {
        const auto [ax, ay] = monomial_exponents(i);
        for (int j = 0; j < nc; ++j) {
            const auto [bx, by] = monomial_exponents(j);
            H(i, j) = moments.integral(ax + bx, ay + by);
        }
    }
    return H;
}

Eigen::MatrixXd mass_matrix_element(const ScaledBasis& basis,
                                    const CellBoundary& boundary, int n_gauss) {
    MonomialMoments moments(boundary, basis.center, basis.scale, 2 * basis.degree,
                            n_gauss);
    Eigen::MatrixXd H = mass_matrix_from_moments(moments, basis.degree, basis.degree);
    Eigen::LLT<Eigen::MatrixXd> llt(H);
    if (llt.info() != Eigen::Success)
        throw NotSPD("element mass matrix failed the Cholesky check");
    return H;
}

double edge_monomial_eval(const EdgeGeom& edge, int i, double t) {
    const Interval iv = edge.param();
    return std::pow((t - iv.midpoint()) / iv.length(), i);
}

Eigen::MatrixXd mass_matrix_edge(const EdgeGeom& edge, int k, int n_gauss) {
    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(k + 1, k + 1);
    const QuadratureRule& rule = gauss_legendre(n_gauss);
    const Interval iv = edge.param();
    const double half = 0.5 * iv.length();
    for (int q = 0; q < n_gauss; ++q) {
        const double t = iv.midpoint() + half * rule.nodes[q];
        const double speed = edge.deriv(t).norm();
        Eigen::VectorXd m(k + 1);
        for (int i = 0; i <= k; ++i) m(i) = edge_monomial_eval(edge, i, t);
        M += (half * rule.weights[q] * speed) * m * m.transpose();
    }
    Eigen::LLT<Eigen::MatrixXd> llt(M);
    if (llt.info() != Eigen::Success)
        throw NotSPD("edge mass matrix failed the Cholesky check");
    return M;
}

}  // namespace curvem
