// Acceptance suite: one pass/fail line per criterion.
//
//   acceptance [--criterion N]
//
// 1  patch test, straight meshes, k = 0..3
// 2  curved-boundary convergence, quad family, k = 0..3 (+ straightened twin)
// 3  circle-inclusion convergence, k = 0..3
// 4  double-interface convergence, k = 0..2
// 5  commuting diagram on random cells and fields
// 6  geometry oracle suite
// 7  inf-sup monitor across the quad family
// 8  local conservation (checked inside the runs of 2-4)

#include <chrono>
#include <cstdio>
#include <cstring>
#include <random>
#include <vector>

#include "curvem/local_vem.hpp"
#include "curvem/verification.hpp"
#include "../tests/helpers.hpp"

using namespace curvem;
using namespace curvem::testing;

namespace {

int failures = 0;

void report(int criterion, bool pass, const std::string& detail) {
    std::printf("%s criterion %d: %s\n", pass ? "PASS" : "FAIL", criterion,
                detail.c_str());
    std::fflush(stdout);
    if (!pass) ++failures;
}

double elapsed_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// ---------------------------------------------------------------- 1

void criterion_1() {
    const auto t0 = std::chrono::steady_clock::now();
    bool pass = true;
    char buf[256];
    std::string detail;
    for (int k = 0; k <= 3 && pass; ++k) {
        for (int n : {4, 8}) {
            // exact reproduction: pressure of degree k (subset of P_{k+1})
            {
                const ManufacturedCase mc = case_polynomial_patch(k);
                const SolveSummary s = solve_case_on_mesh(mc, mc.build_mesh(n), k);
                if (!(s.e_q <= 1e-8 && s.e_p <= 1e-8)) {
                    pass = false;
                    std::snprintf(buf, sizeof(buf),
                                  "k=%d n=%d deg-k: e_q=%.2e e_p=%.2e", k, n, s.e_q,
                                  s.e_p);
                    detail = buf;
                }
            }
            // full-order velocity: pressure of degree k+1 drives q in [P_k]^2
            {
                const ManufacturedCase mc = case_polynomial_patch(k + 1);
                const SolveSummary s = solve_case_on_mesh(mc, mc.build_mesh(n), k);
                if (!(s.e_q <= 1e-8)) {
                    pass = false;
                    std::snprintf(buf, sizeof(buf), "k=%d n=%d deg-k+1: e_q=%.2e", k, n,
                                  s.e_q);
                    detail = buf;
                }
            }
        }
    }
    std::snprintf(buf, sizeof(buf),
                  "patch test k=0..3 on 4x4/8x8 straight meshes (%.1f s)%s%s",
                  elapsed_since(t0), detail.empty() ? "" : " -- ", detail.c_str());
    report(1, pass, buf);
}

// ------------------------------------------------------------- 2, 3, 4

struct RatePair {
    double rate_q;
    double rate_p;
};

std::vector<RatePair> observed_rates(const ConvergenceReport& rep) {
    std::vector<RatePair> rates;
    for (std::size_t i = 1; i < rep.rows.size(); ++i)
        rates.push_back({rep.rows[i].rate_q, rep.rows[i].rate_p});
    return rates;
}

bool conservation_ok(const ConvergenceReport& rep, std::string& detail) {
    for (const ConvergenceRow& r : rep.rows)
        if (r.conservation > 1e-9) {
            detail += " conservation " + std::to_string(r.conservation) + " at n=" +
                      std::to_string(r.n) + ";";
            return false;
        }
    return true;
}

// Errors decrease along the withGeo sequence; one pre-asymptotic violation
// is tolerated for k >= 3.
bool monotone_ok(const ConvergenceReport& rep, int k, std::string& detail) {
    int violations = 0;
    for (std::size_t i = 1; i < rep.rows.size(); ++i)
        if (rep.rows[i].e_q > rep.rows[i - 1].e_q ||
            rep.rows[i].e_p > rep.rows[i - 1].e_p)
            ++violations;
    const int allowed = k >= 3 ? 1 : 0;
    if (violations > allowed) {
        detail += " non-monotone errors (" + std::to_string(violations) +
                  " increases) at k=" + std::to_string(k) + ";";
        return false;
    }
    return true;
}

void criterion_2() {
    const auto t0 = std::chrono::steady_clock::now();
    const ManufacturedCase mc = case_curved_boundary();
    const std::vector<int> sizes = {8, 16, 32, 64};
    bool pass = true;
    std::string detail;
    char buf[256];
    for (int k = 0; k <= 3; ++k) {
        const ConvergenceReport with = run_convergence(mc, sizes, k, GeoMode::WithGeo);
        const auto rates = observed_rates(with);
        const RatePair last = rates.back();
        if (!(last.rate_q >= k + 0.7 && last.rate_p >= k + 0.7)) {
            pass = false;
            std::snprintf(buf, sizeof(buf), " withgeo k=%d last rates %.2f/%.2f;", k,
                          last.rate_q, last.rate_p);
            detail += buf;
        }
        if (!conservation_ok(with, detail)) pass = false;
        if (!monotone_ok(with, k, detail)) pass = false;
        if (k >= 2) {
            const ConvergenceReport no = run_convergence(mc, sizes, k, GeoMode::NoGeo);
            const RatePair nlast = observed_rates(no).back();
            if (!(nlast.rate_q <= 2.4 && nlast.rate_p <= 2.4)) {
                pass = false;
                std::snprintf(buf, sizeof(buf), " nogeo k=%d last rates %.2f/%.2f;", k,
                              nlast.rate_q, nlast.rate_p);
                detail += buf;
            }
            if (!conservation_ok(no, detail)) pass = false;
        }
    }
    std::snprintf(buf, sizeof(buf),
                  "curved-boundary rates (withgeo >= k+0.7, nogeo <= 2.4) (%.1f s)%s%s",
                  elapsed_since(t0), detail.empty() ? "" : " --", detail.c_str());
    report(2, pass, buf);
}

void interface_case_criterion(int number, const ManufacturedCase& mc, int k_max,
                              bool plateau_for_k3) {
    const auto t0 = std::chrono::steady_clock::now();
    const std::vector<int> sizes = {8, 16, 32, 64};
    bool pass = true;
    std::string detail;
    char buf[256];
    for (int k = 0; k <= k_max; ++k) {
        const ConvergenceReport with = run_convergence(mc, sizes, k, GeoMode::WithGeo);
        const auto rates = observed_rates(with);
        const RatePair last = rates.back();
        const bool last_ok = last.rate_q >= k + 0.7 && last.rate_p >= k + 0.7;
        bool ok = last_ok;
        if (!ok && plateau_for_k3 && k == 3) {
            // one pre-asymptotic plateau allowed: accept when at most one
            // observed pair misses the threshold
            int misses = 0;
            for (const RatePair& r : rates)
                if (!(r.rate_q >= k + 0.7 && r.rate_p >= k + 0.7)) ++misses;
            ok = misses <= 1;
        }
        if (!ok) {
            pass = false;
            std::snprintf(buf, sizeof(buf), " k=%d last rates %.2f/%.2f;", k,
                          last.rate_q, last.rate_p);
            detail += buf;
        }
        if (!conservation_ok(with, detail)) pass = false;
        if (!monotone_ok(with, k, detail)) pass = false;
    }
    std::snprintf(buf, sizeof(buf), "%s rates >= k+0.7 for k=0..%d (%.1f s)%s%s",
                  mc.name.c_str(), k_max, elapsed_since(t0),
                  detail.empty() ? "" : " --", detail.c_str());
    report(number, pass, buf);
}

// ---------------------------------------------------------------- 5

void criterion_5() {
    const auto t0 = std::chrono::steady_clock::now();
    std::mt19937 rng(113);
    bool pass = true;
    std::string detail;
    char buf[160];
    std::vector<SmoothField> fields;
    for (int i = 0; i < 10; ++i) fields.push_back(make_random_field(rng));
    double worst = 0.0;
    for (int trial = 0; trial < 50 && pass; ++trial) {
        const int k = trial % 4;
        const TestCell cell = make_random_cell(rng, Vec2(0.15 * (trial % 5), -0.1), 0.9,
                                               4 + trial % 3, trial % 2 == 0);
        const Mesh mesh = single_cell_mesh(cell);
        // high quadrature: the commuting identity is tested, not the rule
        const ElementVem elem(mesh, 0, k, 16);
        for (const SmoothField& f : fields) {
            const Eigen::VectorXd dofs = elem.fortin_interpolate(f.w, f.div_w);
            const PolyCoeffs div_fortin = elem.divergence_poly_from_dofs(dofs);
            const PolyCoeffs div_proj = elem.project_scalar(f.div_w);
            const double scale = std::max(1e-30, div_proj.norm());
            const double err = (div_fortin - div_proj).lpNorm<Eigen::Infinity>() / scale;
            worst = std::max(worst, err);
            if (err > 1e-10) {
                pass = false;
                std::snprintf(buf, sizeof(buf), " trial=%d k=%d err=%.2e;", trial, k, err);
                detail += buf;
                break;
            }
        }
    }
    std::snprintf(buf, sizeof(buf),
                  "commuting diagram, 50 cells x 10 fields, worst %.2e (%.1f s)%s%s",
                  worst, elapsed_since(t0), detail.empty() ? "" : " --", detail.c_str());
    report(5, pass, buf);
}

// ---------------------------------------------------------------- 6

void criterion_6() {
    const auto t0 = std::chrono::steady_clock::now();
    bool pass = true;
    std::string detail;
    char buf[160];

    // monomial integrals vs the fan oracle on random curved cells
    std::mt19937 rng(127);
    double worst = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
        const TestCell cell = make_random_cell(rng, Vec2(0.05 * trial, 0.02 * trial),
                                               1.0, 4 + trial % 4, true);
        const ElementMeasures m = element_measures(cell.boundary(), 16);
        const ScaledBasis basis{m.centroid, m.diameter, 8};
        for (int idx = 0; idx < poly_space_dim(8); ++idx) {
            const auto [ax, ay] = monomial_exponents(idx);
            const double mono = element_monomial_integral(cell.boundary(), m.centroid,
                                                          m.diameter, ax, ay, 16);
            const double fan = element_bulk_integral(
                cell.boundary(),
                [&](const Vec2& p) { return monomial_eval(basis, idx, p); }, 16,
                m.centroid);
            const double err = std::abs(mono - fan) / std::max(m.area, std::abs(mono));
            worst = std::max(worst, err);
            if (err > 1e-11) pass = false;
        }
    }
    if (!pass) detail += " cross-oracle worst " + std::to_string(worst) + ";";

    // analytic areas
    {
        const double R = 0.45;
        auto circle =
            std::make_shared<ParametricCurve>(make_circle_curve(Vec2(0, 0), R));
        TestCell half;
        half.edges.push_back(EdgeGeom::straight(Vec2(-R, 0), Vec2(R, 0)));
        half.edges.push_back(EdgeGeom::curved(circle, 0.0, EIGEN_PI, +1));
        const double area =
            element_monomial_integral(half.boundary(), Vec2(0, 0.1), 0.9, 0, 0, 24);
        if (std::abs(area - EIGEN_PI * R * R / 2) > 1e-10) {
            pass = false;
            std::snprintf(buf, sizeof(buf), " half-disk area err %.2e;",
                          std::abs(area - EIGEN_PI * R * R / 2));
            detail += buf;
        }
    }
    {
        const Mesh mesh = build_deformed_quad_mesh(
            8, make_poly_graph_curve({1.0, 0.0, -0.5, 0.5}, 0, 1),
            make_poly_graph_curve({0.0, 0.0, -0.5, 0.5}, 0, 1));
        double area = 0.0;
        for (int c = 0; c < static_cast<int>(mesh.cells.size()); ++c)
            area += mesh.cell_measures(c, 16).area;
        if (std::abs(area - 1.0) > 1e-10) {
            pass = false;
            std::snprintf(buf, sizeof(buf), " deformed-square area err %.2e;",
                          std::abs(area - 1.0));
            detail += buf;
        }
    }
    std::snprintf(buf, sizeof(buf),
                  "geometry oracles, cross worst %.2e (%.1f s)%s%s", worst,
                  elapsed_since(t0), detail.empty() ? "" : " --", detail.c_str());
    report(6, pass, buf);
}

// ---------------------------------------------------------------- 7

void criterion_7() {
    const auto t0 = std::chrono::steady_clock::now();
    const ManufacturedCase mc = case_curved_boundary();
    bool pass = true;
    std::string detail;
    char buf[200];
    for (int k = 0; k <= 2; ++k) {
        std::vector<double> sigmas;
        for (int n : {8, 16, 32, 64}) {
            const Mesh mesh = mc.build_mesh(n);
            const AssembledSystem sys = assemble(mesh, mc.problem(), k);
            sigmas.push_back(infsup_monitor(sys));
        }
        const double drop = sigmas.front() / sigmas.back();
        std::snprintf(buf, sizeof(buf), " k=%d sigma %.3e -> %.3e (ratio %.2f);", k,
                      sigmas.front(), sigmas.back(), drop);
        detail += buf;
        if (!(sigmas.back() > sigmas.front() / 2.0)) pass = false;
    }
    std::snprintf(buf, sizeof(buf), "inf-sup monitor over quad family (%.1f s) --",
                  elapsed_since(t0));
    report(7, pass, buf + detail);
}

// ---------------------------------------------------------------- 8

void criterion_8() {
    const auto t0 = std::chrono::steady_clock::now();
    // The per-cell conservation identity is asserted inside criteria 2-4;
    // this entry re-checks it on one solve of each case.
    bool pass = true;
    std::string detail;
    char buf[160];
    const std::vector<std::pair<ManufacturedCase, int>> runs = {
        {case_curved_boundary(), 1},
        {case_circle_inclusion(), 0},
        {case_double_interface(), 1}};
    for (const auto& [mc, k] : runs) {
        const SolveSummary s = solve_case_on_mesh(mc, mc.build_mesh(8), k);
        if (s.conservation > 1e-9) {
            pass = false;
            std::snprintf(buf, sizeof(buf), " %s residual %.2e;", mc.name.c_str(),
                          s.conservation);
            detail += buf;
        }
    }
    std::snprintf(buf, sizeof(buf), "local conservation <= 1e-9 (%.1f s)%s%s",
                  elapsed_since(t0), detail.empty() ? "" : " --", detail.c_str());
    report(8, pass, buf);
}

}  // namespace

int main(int argc, char** argv) {
    int only = 0;
    for (int i = 1; i + 1 < argc + 1; ++i) {
        if (i + 1 < argc && std::strcmp(argv[i], "--criterion") == 0)
            only = std::atoi(argv[i + 1]);
    }
    const auto want = [&](int c) { return only == 0 || only == c; };
    if (want(1)) criterion_1();
    if (want(2)) criterion_2();
    if (want(3)) interface_case_criterion(3, case_circle_inclusion(), 3, true);
    if (want(4)) interface_case_criterion(4, case_double_interface(), 2, false);
    if (want(5)) criterion_5();
    if (want(6)) criterion_6();
    if (want(7)) criterion_7();
    if (want(8)) criterion_8();
    return failures == 0 ? 0 : 1;
}
