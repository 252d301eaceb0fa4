#include "curvem/verification.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <random>
#include <thread>

#include "curvem/log.hpp"

namespace {
constexpr double kPi = EIGEN_PI;
}

namespace curvem {

ProblemData ManufacturedCase::problem() const {
    ProblemData data;
    data.coeff = coeff;
    data.source = source;
    // Pressure data on natural edges; the classifier resolves the region at
    // the quadrature point (p is continuous across interfaces).
    data.boundary_pressure = [this](const Vec2& x, int) {
        return pressure(x, region_of(x));
    };
    return data;
}

// ----------------------------------------------------------- §5.1 family

ManufacturedCase case_curved_boundary() {
    ManufacturedCase mc;
    mc.name = "curved-boundary";
    mc.n_regions = 1;
    // g1, g2 polynomial graphs: 0.5 x^2 (x - 1) + {1, 0}.
    const std::vector<double> g2c = {0.0, 0.0, -0.5, 0.5};
    const std::vector<double> g1c = {1.0, 0.0, -0.5, 0.5};
    mc.build_mesh = [g1c, g2c](int n) {
        return build_deformed_quad_mesh(n, make_poly_graph_curve(g1c, 0.0, 1.0),
                                        make_poly_graph_curve(g2c, 0.0, 1.0));
    };
    mc.region_of = [](const Vec2&) { return 0; };
    mc.pressure = [](const Vec2& x, int) {
        return std::sin(kPi * x.x()) * std::cos(kPi * x.y());
    };
    mc.velocity = [](const Vec2& x, int) {
        // q = -grad p for mu = 1, kappa = I
        return Vec2(-kPi * std::cos(kPi * x.x()) * std::cos(kPi * x.y()),
                    kPi * std::sin(kPi * x.x()) * std::sin(kPi * x.y()));
    };
    mc.source = [](const Vec2& x, int) {
        return -2.0 * kPi * kPi * std::sin(kPi * x.x()) *
               std::cos(kPi * x.y());
    };
    mc.coeff = {RegionCoeff{}};
    return mc;
}

// ----------------------------------------------------------- §5.2 family

ManufacturedCase case_circle_inclusion() {
    ManufacturedCase mc;
    mc.name = "circle-inclusion";
    mc.n_regions = 2;
    const double R = 0.45;
    const double k1 = 1.0, k2 = 0.1;
    mc.build_mesh = [R](int n) {
        Mesh grid = build_square_grid(n, -1.0, 1.0);
        CutOptions opt;
        opt.curve_name = "inclusion";
        opt.classify = [R](const Vec2& p) { return p.norm() < R ? 1 : 0; };
        return cut_mesh_with_curve(grid, make_circle_curve(Vec2::Zero(), R), opt);
    };
    mc.region_of = [R](const Vec2& p) { return p.norm() < R ? 1 : 0; };
    mc.pressure = [R, k2](const Vec2& x, int region) {
        const double r = x.norm();
        if (region == 1) return std::cos(r);
        return k2 * std::cos(r) + std::cos(R) * (1.0 - k2);
    };
    mc.velocity = [k2](const Vec2& x, int) {
        // q = k2 sin(r)/r (x, y) in both regions
        const double r = x.norm();
        const double s = r < 1e-8 ? 1.0 - r * r / 6.0 : std::sin(r) / r;
        return Vec2(k2 * s * x);
    };
    mc.source = [k2](const Vec2& x, int) {
        const double r = x.norm();
        const double s = r < 1e-8 ? 1.0 - r * r / 6.0 : std::sin(r) / r;
        return -k2 * (std::cos(r) + s);
    };
    RegionCoeff outer;
    outer.kappa = k1 * Eigen::Matrix2d::Identity();
    RegionCoeff inner;
    inner.kappa = k2 * Eigen::Matrix2d::Identity();
    mc.coeff = {outer, inner};
    return mc;
}

// ----------------------------------------------------------- §5.3 family

ManufacturedCase case_double_interface() {
    ManufacturedCase mc;
    mc.name = "double-interface";
    mc.n_regions = 3;
    const double a = 0.2, b = 0.31;
    const double phi = kPi / (2.0 * b);
    auto s_of = [a](double x) { return a * std::sin(kPi * x); };
    auto region_of = [a, b, s_of](const Vec2& p) {
        const double u = p.y() - s_of(p.x());
        if (u > b) return 0;
        if (u >= -b) return 1;
        return 2;
    };
    mc.build_mesh = [a, b, region_of](int n) {
        Mesh grid = build_square_grid(n, -1.0, 1.0);
        CutOptions opt1;
        opt1.curve_name = "gamma1";
        Mesh cut1 = cut_mesh_with_curve(
            grid, make_sin_graph_curve(a, kPi, 0.0, b, -1.0, 1.0), opt1);
        CutOptions opt2;
        opt2.curve_name = "gamma2";
        Mesh cut2 = cut_mesh_with_curve(
            cut1, make_sin_graph_curve(a, kPi, 0.0, -b, -1.0, 1.0), opt2);
        assign_regions(cut2, region_of);
        return cut2;
    };
    mc.region_of = region_of;
    mc.pressure = [a, phi, s_of](const Vec2& p, int region) {
        const double sx = std::sin(kPi * p.x());
        if (region == 0) return a * sx;
        if (region == 2) return -a * sx;
        return a * std::sin(phi * (p.y() - s_of(p.x()))) * sx;
    };
    mc.velocity = [a, phi, s_of](const Vec2& p, int region) {
        const double pi = kPi;
        const double cx = std::cos(pi * p.x());
        if (region == 0) return Vec2(-a * pi * cx, 0.0);
        if (region == 2) return Vec2(a * pi * cx, 0.0);
        const double sx = std::sin(pi * p.x());
        const double u = p.y() - s_of(p.x());
        const double sp = a * pi * cx;  // s'(x)
        const double px = a * (-phi * sp * std::cos(phi * u) * sx +
                               std::sin(phi * u) * pi * cx);
        const double py = a * phi * std::cos(phi * u) * sx;
        return Vec2(-px, -py);
    };
    mc.source = [a, phi, s_of](const Vec2& p, int region) {
        const double pi = kPi;
        const double sx = std::sin(pi * p.x());
        // f = -div q = laplace(p)
        if (region == 0) return -a * pi * pi * sx;
        if (region == 2) return a * pi * pi * sx;
        const double cx = std::cos(pi * p.x());
        const double u = p.y() - s_of(p.x());
        const double sp = a * pi * cx;
        const double spp = -a * pi * pi * sx;
        const double S = std::sin(phi * u), C = std::cos(phi * u);
        return a * (-S * sx * (phi * phi * sp * sp + pi * pi + phi * phi) -
                    phi * C * (spp * sx + 2.0 * pi * sp * cx));
    };
    mc.coeff = {RegionCoeff{}, RegionCoeff{}, RegionCoeff{}};
    return mc;
}

ManufacturedCase manufactured_case(const std::string& name) {
    if (name == "curved-boundary") return case_curved_boundary();
    if (name == "circle-inclusion") return case_circle_inclusion();
    if (name == "double-interface") return case_double_interface();
    throw Error("unknown manufactured case '" + name + "'");
}

ManufacturedCase case_polynomial_patch(int pressure_degree) {
    ManufacturedCase mc;
    mc.name = "polynomial-patch-" + std::to_string(pressure_degree);
    mc.n_regions = 1;
    const int d = pressure_degree;
    mc.build_mesh = [](int n) { return build_square_grid(n, 0.0, 1.0); };
    mc.region_of = [](const Vec2&) { return 0; };
    // p = (x + 2y)^d + (x - 0.3)^(d-1), a genuinely degree-d pressure.
    mc.pressure = [d](const Vec2& p, int) {
        const double t = p.x() + 2.0 * p.y();
        return std::pow(t, d) + (d > 1 ? std::pow(p.x() - 0.3, d - 1) : 0.0);
    };
    mc.velocity = [d](const Vec2& p, int) {
        if (d == 0) return Vec2(0.0, 0.0);
        const double t = p.x() + 2.0 * p.y();
        Vec2 grad(d * std::pow(t, d - 1), 2.0 * d * std::pow(t, d - 1));
        if (d > 1) grad.x() += (d - 1) * std::pow(p.x() - 0.3, d - 2);
        return Vec2(-grad);
    };
    mc.source = [d](const Vec2& p, int) {
        if (d < 2) return 0.0;
        const double t = p.x() + 2.0 * p.y();
        double lap = d * (d - 1) * std::pow(t, d - 2) * 5.0;
        if (d > 2) lap += (d - 1) * (d - 2) * std::pow(p.x() - 0.3, d - 3);
        return lap;
    };
    mc.coeff = {RegionCoeff{}};
    return mc;
}

// -------------------------------------------------------- consistency

ConsistencyReport check_case_consistency(const ManufacturedCase& mc,
                                         int samples_per_region, unsigned seed) {
    const Mesh probe = mc.build_mesh(4);
    Vec2 lo = probe.vertices.front(), hi = probe.vertices.front();
    for (const Vec2& v : probe.vertices) {
        lo = lo.cwiseMin(v);
        hi = hi.cwiseMax(v);
    }
    const double fd = 1e-6 * (hi - lo).norm();
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> ux(lo.x() + 4 * fd, hi.x() - 4 * fd);
    std::uniform_real_distribution<double> uy(lo.y() + 4 * fd, hi.y() - 4 * fd);

    ConsistencyReport rep;
    std::vector<int> found(mc.n_regions, 0);
    int guard = 0;
    while (guard++ < 200000) {
        bool done = true;
        for (int r = 0; r < mc.n_regions; ++r) done = done && found[r] >= samples_per_region;
        if (done) break;
        const Vec2 p(ux(rng), uy(rng));
        const int region = mc.region_of(p);
        if (found[region] >= samples_per_region) continue;
        // The whole difference stencil must stay inside one region.
        bool clean = true;
        for (const Vec2& d : {Vec2(2 * fd, 0), Vec2(-2 * fd, 0), Vec2(0, 2 * fd),
                              Vec2(0, -2 * fd)})
            clean = clean && mc.region_of(p + d) == region;
        if (!clean) continue;
        found[region]++;

        auto pr = [&](const Vec2& x) { return mc.pressure(x, region); };
        const Vec2 grad_p((pr(p + Vec2(fd, 0)) - pr(p - Vec2(fd, 0))) / (2 * fd),
                          (pr(p + Vec2(0, fd)) - pr(p - Vec2(0, fd))) / (2 * fd));
        auto q = [&](const Vec2& x) { return mc.velocity(x, region); };
        const double div_q = (q(p + Vec2(fd, 0)).x() - q(p - Vec2(fd, 0)).x()) / (2 * fd) +
                             (q(p + Vec2(0, fd)).y() - q(p - Vec2(0, fd)).y()) / (2 * fd);

        const RegionCoeff& rc = mc.coeff[std::min<std::size_t>(region, mc.coeff.size() - 1)];
        const Vec2 flow = rc.mu_at(p) * q(p) + rc.kappa_at(p) * grad_p;
        rep.max_flux_residual = std::max(rep.max_flux_residual, flow.norm());
        rep.max_mass_residual =
            std::max(rep.max_mass_residual, std::abs(div_q + mc.source(p, region)));
    }
    return rep;
}

// --------------------------------------------------------------- errors

std::pair<double, double> compute_errors_fields(
    const Mesh& mesh, int k,
    const std::function<Vec2(const Vec2&, int)>& qh,
    const std::function<double(const Vec2&, int)>& ph,
    const ManufacturedCase& mc) {
    double eq2 = 0.0, ep2 = 0.0;
    const int order = 2 * k + 8;
    for (int c = 0; c < static_cast<int>(mesh.cells.size()); ++c) {
        const CellBoundary b = mesh.cell_boundary(c);
        const ElementMeasures m = element_measures(b, k + 4);
        const int region = mesh.cells[c].region_id;
        eq2 += element_bulk_integral(
            b,
            [&](const Vec2& x) {
                return (mc.velocity(x, region) - qh(x, c)).squaredNorm();
            },
            order, m.centroid);
        ep2 += element_bulk_integral(
            b,
            [&](const Vec2& x) {
                const double d = mc.pressure(x, region) - ph(x, c);
                return d * d;
            },
            order, m.centroid);
    }
    return {std::sqrt(eq2), std::sqrt(ep2)};
}

std::pair<double, double> compute_errors(const Mesh& mesh, const DofMap& map,
                                         const FieldEvaluation& fields,
                                         const ManufacturedCase& mc) {
    return compute_errors_fields(
        mesh, map.k,
        [&](const Vec2& x, int c) {
            return vector_poly_eval(fields.bases[c], fields.velocity_proj[c], x);
        },
        [&](const Vec2& x, int c) {
            return poly_eval(fields.bases[c], fields.pressure[c], x);
        },
        mc);
}

double max_conservation_residual(const Mesh& mesh, const DofMap& map,
                                 const Solution& sol, const ManufacturedCase& mc) {
    double worst = 0.0;
    for (int c = 0; c < static_cast<int>(mesh.cells.size()); ++c) {
        const ElementVem elem(mesh, c, map.k);
        const Eigen::VectorXd dofs = gather_cell_velocity(mesh, map, sol, c);
        // int_E div q_h dE is exactly the boundary flux carried by the
        // constant edge moments.
        double flux = 0.0;
        for (int e = 0; e < elem.layout().n_edges; ++e)
            flux += elem.edge_sign(e) * elem.edge_arclen(e) *
                    dofs(elem.layout().d1_index(e, 0));
        const int region = mesh.cells[c].region_id;
        const double f_int = elem.bulk_integral(
            [&](const Vec2& x) { return mc.source(x, region); }, 2 * map.k + 4);
        worst = std::max(worst, std::abs(flux + f_int));
    }
    return worst;
}

// ---------------------------------------------------------- convergence

SolveSummary solve_case_on_mesh(const ManufacturedCase& mc, const Mesh& mesh, int k,
                                bool with_infsup) {
    SolveSummary out;
    const AssembledSystem sys = assemble(mesh, mc.problem(), k);
    const Solution sol = solve(sys);
    const FieldEvaluation fields = evaluate(mesh, sys.map, sol);
    std::tie(out.e_q, out.e_p) = compute_errors(mesh, sys.map, fields, mc);
    out.ndof = sys.map.total();
    out.conservation = max_conservation_residual(mesh, sys.map, sol, mc);
    out.residual = sol.residual;
    double h_sum = 0.0;
    for (int c = 0; c < static_cast<int>(mesh.cells.size()); ++c)
        h_sum += mesh.cell_measures(c).diameter;
    out.h = h_sum / static_cast<double>(mesh.cells.size());
    if (with_infsup) out.infsup = infsup_monitor(sys);
    return out;
}

ConvergenceReport run_convergence(const ManufacturedCase& mc,
                                  const std::vector<int>& sizes, int k, GeoMode mode,
                                  const RunOptions& options) {
    ConvergenceReport report;
    report.case_name = mc.name;
    report.mode = mode;
    report.k = k;
    report.rows.resize(sizes.size());

    auto run_one = [&](std::size_t i) {
        const auto t0 = std::chrono::steady_clock::now();
        Mesh mesh = mc.build_mesh(sizes[i]);
        if (mode == GeoMode::NoGeo) mesh = straighten(mesh);
        const SolveSummary s = solve_case_on_mesh(mc, mesh, k, options.with_infsup);
        ConvergenceRow& row = report.rows[i];
        row.n = sizes[i];
        row.h = s.h;
        row.e_q = s.e_q;
        row.e_p = s.e_p;
        row.ndof = s.ndof;
        row.conservation = s.conservation;
        row.infsup = s.infsup;
        row.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
                          .count();
        log::info("%s k=%d %s n=%d: e_q=%.3e e_p=%.3e ndof=%d", mc.name.c_str(), k,
                  geo_mode_name(mode), sizes[i], row.e_q, row.e_p, row.ndof);
    };

    if (options.jobs > 1) {
        std::vector<std::thread> pool;
        std::atomic<std::size_t> cursor{0};
        const int width = std::min<int>(options.jobs, static_cast<int>(sizes.size()));
        for (int t = 0; t < width; ++t)
            pool.emplace_back([&] {
                for (std::size_t i = cursor.fetch_add(1); i < sizes.size();
                     i = cursor.fetch_add(1))
                    run_one(i);
            });
        for (auto& th : pool) th.join();
    } else {
        for (std::size_t i = 0; i < sizes.size(); ++i) run_one(i);
    }

    for (std::size_t i = 1; i < report.rows.size(); ++i) {
        const ConvergenceRow& prev = report.rows[i - 1];
        ConvergenceRow& row = report.rows[i];
        const double dh = std::log(prev.h / row.h);
        row.rate_q = std::log(prev.e_q / row.e_q) / dh;
        row.rate_p = std::log(prev.e_p / row.e_p) / dh;
    }
    return report;
}

void write_csv(const ConvergenceReport& report, std::ostream& os) {
    os << "mode,k,h,e_q,e_p,rate_q,rate_p,ndof,seconds\n";
    char buf[512];
    for (const ConvergenceRow& r : report.rows) {
        std::snprintf(buf, sizeof(buf),
                      "%s,%d,%.17g,%.17g,%.17g,%.17g,%.17g,%d,%.17g\n",
                      geo_mode_name(report.mode), report.k, r.h, r.e_q, r.e_p, r.rate_q,
                      r.rate_p, r.ndof, r.seconds);
        os << buf;
    }
}

}  // namespace curvem
