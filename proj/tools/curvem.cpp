#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "curvem/log.hpp"
#include "curvem/verification.hpp"

namespace {

using namespace curvem;

struct RunConfig {
    std::string command;
    std::string case_name = "curved-boundary";
    std::string manufactured = "curved-boundary";
    int k = 0;
    std::string mode = "withgeo";
    std::vector<int> sizes = {8, 16, 32, 64};
    int n = 8;
    int jobs = 1;
    bool infsup = false;
    std::string in_path;
    std::string out_path;
    bool print_config = false;

    std::string canonical() const {
        std::ostringstream os;
        os << command;
        if (command == "mesh" || command == "solve" || command == "convergence")
            os << " --case " << case_name;
        if (command == "solve" || command == "convergence") os << " --k " << k;
        if (command != "validate") os << " --mode " << mode;
        if (command == "convergence") {
            os << " --sizes ";
            for (std::size_t i = 0; i < sizes.size(); ++i)
                os << (i ? "," : "") << sizes[i];
            os << " --jobs " << jobs;
            if (infsup) os << " --infsup";
        }
        if (command == "mesh" || command == "solve") os << " --n " << n;
        if (!in_path.empty()) os << " --in " << in_path;
        if (!out_path.empty()) os << " --out " << out_path;
        if (case_name == "from-file") os << " --manufactured " << manufactured;
        return os.str();
    }
};

GeoMode parse_mode(const std::string& mode) {
    if (mode == "withgeo") return GeoMode::WithGeo;
    if (mode == "nogeo") return GeoMode::NoGeo;
    throw CLI::ValidationError("--mode", "must be withgeo or nogeo");
}

Mesh build_case_mesh(const RunConfig& cfg) {
    Mesh mesh;
    if (cfg.case_name == "from-file") {
        if (cfg.in_path.empty())
            throw CLI::ValidationError("--in", "required with --case from-file");
        mesh = load_mesh(cfg.in_path);
    } else {
        mesh = manufactured_case(cfg.case_name).build_mesh(cfg.n);
    }
    if (parse_mode(cfg.mode) == GeoMode::NoGeo) mesh = straighten(mesh);
    return mesh;
}

int cmd_mesh(const RunConfig& cfg) {
    const Mesh mesh = build_case_mesh(cfg);
    save_mesh(mesh, cfg.out_path);
    const MeshQualityReport rep = validate(mesh);
    std::printf("wrote %s: %d cells, %d edges, h = %.6g\n", cfg.out_path.c_str(),
                rep.cell_count, rep.edge_count, rep.h);
    return 0;
}

int cmd_validate(const RunConfig& cfg) {
    const Mesh mesh = load_mesh(cfg.in_path);
    const MeshQualityReport rep = validate(mesh);
    int star_fail = 0;
    for (bool ok : rep.star_ok)
        if (!ok) ++star_fail;
    std::printf("cells            %d\n", rep.cell_count);
    std::printf("edges            %d\n", rep.edge_count);
    std::printf("h (mean diam)    %.17g\n", rep.h);
    std::printf("min h_e / h_E    %.17g\n", rep.min_edge_ratio);
    std::printf("star test fails  %d\n", star_fail);
    return 0;
}

int cmd_solve(const RunConfig& cfg) {
    const std::string case_for_data =
        cfg.case_name == "from-file" ? cfg.manufactured : cfg.case_name;
    const ManufacturedCase mc = manufactured_case(case_for_data);
    const Mesh mesh = build_case_mesh(cfg);
    const SolveSummary s = solve_case_on_mesh(mc, mesh, cfg.k, cfg.infsup);
    std::printf("case        %s\n", case_for_data.c_str());
    std::printf("k           %d\n", cfg.k);
    std::printf("mode        %s\n", cfg.mode.c_str());
    std::printf("h           %.17g\n", s.h);
    std::printf("e_q         %.17g\n", s.e_q);
    std::printf("e_p         %.17g\n", s.e_p);
    std::printf("ndof        %d\n", s.ndof);
    std::printf("residual    %.3e\n", s.residual);
    std::printf("conservation %.3e\n", s.conservation);
    if (cfg.infsup) std::printf("infsup      %.17g\n", s.infsup);
    return 0;
}

int cmd_convergence(const RunConfig& cfg) {
    const ManufacturedCase mc = manufactured_case(cfg.case_name);
    RunOptions opt;
    opt.jobs = cfg.jobs;
    opt.with_infsup = cfg.infsup;
    const ConvergenceReport rep =
        run_convergence(mc, cfg.sizes, cfg.k, parse_mode(cfg.mode), opt);
    if (!cfg.out_path.empty()) {
        std::ofstream os(cfg.out_path);
        if (!os) throw Error("cannot open '" + cfg.out_path + "'");
        write_csv(rep, os);
    } else {
        write_csv(rep, std::cout);
    }
    for (const ConvergenceRow& r : rep.rows)
        std::fprintf(stderr, "n=%-3d h=%.4e e_q=%.4e e_p=%.4e rate_q=%.2f rate_p=%.2f\n",
                     r.n, r.h, r.e_q, r.e_p, r.rate_q, r.rate_p);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    RunConfig cfg;
    CLI::App app{"mixed virtual element solver on curved polygonal meshes"};
    app.require_subcommand(1);

    const std::vector<std::string> cases = {"curved-boundary", "circle-inclusion",
                                            "double-interface", "from-file"};
    auto add_common = [&](CLI::App* sub, bool needs_k) {
        sub->add_option("--case", cfg.case_name, "problem case")
            ->check(CLI::IsMember(cases));
        sub->add_option("--mode", cfg.mode, "geometry handling")
            ->check(CLI::IsMember({"withgeo", "nogeo"}));
        if (needs_k) sub->add_option("--k", cfg.k, "polynomial degree")->check(CLI::Range(0, 4));
        sub->add_flag("--print-config", cfg.print_config, "print the canonical config line");
    };

    CLI::App* mesh_cmd = app.add_subcommand("mesh", "generate a mesh file");
    add_common(mesh_cmd, false);
    mesh_cmd->add_option("--n", cfg.n, "cells per side")->check(CLI::PositiveNumber);
    mesh_cmd->add_option("--out", cfg.out_path, "output mesh file")->required();

    CLI::App* validate_cmd = app.add_subcommand("validate", "validate a mesh file");
    validate_cmd->add_option("--in", cfg.in_path, "mesh file")->required();
    validate_cmd->add_flag("--print-config", cfg.print_config);

    CLI::App* solve_cmd = app.add_subcommand("solve", "single manufactured solve");
    add_common(solve_cmd, true);
    solve_cmd->add_option("--n", cfg.n, "cells per side")->check(CLI::PositiveNumber);
    solve_cmd->add_option("--in", cfg.in_path, "mesh file for --case from-file");
    solve_cmd->add_option("--manufactured", cfg.manufactured,
                          "manufactured data for --case from-file");
    solve_cmd->add_flag("--infsup", cfg.infsup, "also compute the inf-sup monitor");

    CLI::App* conv_cmd = app.add_subcommand("convergence", "mesh sequence study");
    add_common(conv_cmd, true);
    conv_cmd->add_option("--sizes", cfg.sizes, "mesh sizes")->delimiter(',');
    conv_cmd->add_option("--jobs", cfg.jobs, "concurrent mesh runs")
        ->check(CLI::PositiveNumber);
    conv_cmd->add_option("--out", cfg.out_path, "CSV output path");
    conv_cmd->add_flag("--infsup", cfg.infsup, "also compute the inf-sup monitor");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    }

    cfg.command = app.get_subcommands().front()->get_name();
    if (cfg.print_config) std::printf("%s\n", cfg.canonical().c_str());

    try {
        if (cfg.command == "mesh") return cmd_mesh(cfg);
        if (cfg.command == "validate") return cmd_validate(cfg);
        if (cfg.command == "solve") return cmd_solve(cfg);
        if (cfg.command == "convergence") return cmd_convergence(cfg);
    } catch (const curvem::Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return 1;
}
