#include "wied/runner.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "wied/diagnostics.hpp"
#include "wied/energy.hpp"
#include "wied/errors.hpp"
#include "wied/field_io.hpp"
#include "wied/reference.hpp"
#include "wied/solver.hpp"

namespace wied {

namespace {

void write_report_json(const SolveReport& r, const std::string& path) {
    nlohmann::json j;
    j["converged"] = r.converged;
    j["iterations"] = r.iterations;
    j["cg_iterations"] = r.cg_iterations;
    j["initial_residual"] = r.initial_residual;
    j["final_residual"] = r.final_residual;
    j["energy"] = {{"total", r.energy.total},
                   {"kinetic", r.energy.kinetic},
                   {"dirichlet", r.energy.dirichlet},
                   {"potential", r.energy.potential}};
    j["wall_time_s"] = r.wall_time_s;
    j["min_u"] = r.min_u;
    j["max_u"] = r.max_u;
    j["max_u0"] = r.max_u0;
    j["message"] = r.message;
    std::ofstream out(path);
    if (!out) throw data_error("cannot open " + path);
    out << j.dump(2) << "\n";
}

std::string stem_of(std::string path) {
    for (const char* ext : {".json", ".f64"}) {
        const std::string e = ext;
        if (path.size() > e.size() && path.compare(path.size() - e.size(), e.size(), e) == 0)
            return path.substr(0, path.size() - e.size());
    }
    return path;
}

double datum_theta(const RunConfig& cfg, double max_u0) {
    return cfg.theta > 0.0 ? cfg.theta
                           : positivity_threshold(cfg.solver.tol_grad, max_u0);
}

} // namespace

int run_solve(const RunConfig& cfg, const std::string& out_dir, bool quiet) {
    std::filesystem::create_directories(out_dir);
    GridPtr grid = make_run_grid(cfg);
    try {
        auto [u, rep] = minimize(cfg.problem, grid, cfg.solver);
        dump_field(u, out_dir + "/solution", cfg.problem.gamma, cfg.problem.epsilon);
        write_report_json(rep, out_dir + "/solve_report.json");
        const EnergyTrace tr = energy_trace(u, cfg.problem);
        write_trace_csv(tr, out_dir + "/energy_trace.csv");
        if (!quiet)
            std::printf("solve: converged in %d iterations (%d cg), residual %.3e, "
                        "energy %.9g, %.2fs\n",
                        rep.iterations, rep.cg_iterations, rep.final_residual,
                        rep.energy.total, rep.wall_time_s);
        return 0;
    } catch (const nonconvergence_error& e) {
        SolveReport rep = e.report;
        rep.message = e.what();
        write_report_json(rep, out_dir + "/solve_report.json");
        std::fprintf(stderr, "solve: %s\n", e.what());
        return 2;
    }
}

int run_reference(const RunConfig& cfg, const std::string& out_dir, bool quiet) {
    std::filesystem::create_directories(out_dir);
    GridPtr grid = make_run_grid(cfg);
    try {
        const ParabolicRun run = solve_parabolic(cfg.problem, grid, cfg.solver);
        dump_field(run.u, out_dir + "/reference", cfg.problem.gamma, cfg.problem.epsilon);
        write_step_csv(run.steps, out_dir + "/reference_steps.csv");
        if (!quiet) {
            int it = 0;
            for (const ParabolicStep& s : run.steps) it += s.newton_iters;
            std::printf("reference: %d steps, %d newton iterations total\n",
                        static_cast<int>(run.steps.size()), it);
        }
        return 0;
    } catch (const nonconvergence_error& e) {
        std::fprintf(stderr, "reference: %s\n", e.what());
        return 2;
    }
}

int run_sweep(const RunConfig& cfg, const std::string& out_dir, bool quiet) {
    if (cfg.eps_list.empty())
        throw parameter_error("sweep: config must provide problem.eps_list");
    std::filesystem::create_directories(out_dir);
    GridPtr grid = make_run_grid(cfg);

    const std::vector<double> u0 =
        sample_initial(cfg.problem.initial, *grid, cfg.problem.gamma);
    const double max_u0 = u0.empty() ? 0.0 : *std::max_element(u0.begin(), u0.end());
    const double theta = datum_theta(cfg, max_u0);

    const ConvergenceReport rep =
        eps_sweep(cfg.problem, cfg.eps_list, grid, cfg.solver, cfg.qr_radius, theta);
    write_sweep_json(rep, out_dir + "/sweep_report.json");
    write_sweep_csv(rep, out_dir + "/sweep.csv");

    bool all_ok = true;
    for (const SweepRow& row : rep.rows) all_ok = all_ok && row.converged;
    if (!quiet) {
        for (const SweepRow& row : rep.rows)
            std::printf("sweep: eps %.4g  l2 %.6e  chi %.6e  %s\n", row.eps, row.l2_error,
                        row.chi, row.converged ? "ok" : "FAILED");
        std::printf("sweep: oracle floor %.6e, monotone=%d, floor_reached=%d\n",
                    rep.oracle_floor, rep.errors_monotone ? 1 : 0,
                    rep.floor_reached ? 1 : 0);
    }
    return all_ok ? 0 : 2;
}

int run_diagnose(const RunConfig& cfg, const std::string& out_dir, bool quiet,
                 const std::string& field_path) {
    std::filesystem::create_directories(out_dir);
    GridPtr grid = make_run_grid(cfg);
    const LoadedField lf = load_field(stem_of(field_path));
    const SpaceTimeGrid& fg = *lf.field.grid;
    if (fg.dim != grid->dim || fg.nx != grid->nx || fg.nt != grid->nt ||
        !fg.same_box(*grid))
        throw format_error("diagnose: field dump grid does not match the config grid");

    ProblemSpec spec = cfg.problem;
    spec.gamma = lf.gamma;
    spec.epsilon = lf.epsilon;
    validate_spec(spec);

    double max_u0 = 0.0;
    for (std::size_t n = 0; n < grid->spatial_nodes(); ++n)
        max_u0 = std::max(max_u0, lf.field.v[n]);
    const double theta = datum_theta(cfg, max_u0);

    std::vector<double> radii = cfg.radii;
    if (radii.empty())
        radii = {spec.epsilon, 2.0 * spec.epsilon, std::min(0.25, grid->T),
                 std::min(0.5, grid->T)};

    const EnergyEstimateReport er = check_energy_bounds(lf.field, spec, radii, cfg.margin);
    write_energy_report_json(er, out_dir + "/energy_report.json");
    write_slab_csv(er, out_dir + "/slab.csv");

    const EnergyTrace tr = energy_trace(lf.field, spec);
    const DerivLawReport dl = check_derivative_law(tr);
    write_derivlaw_json(dl, out_dir + "/derivative_law.json");

    double halfwidth = 0.5 * (grid->b[0] - grid->a[0]);
    if (grid->dim == 2) halfwidth = std::min(halfwidth, 0.5 * (grid->b[1] - grid->a[1]));
    const double rmax = 0.5 * std::min(halfwidth, std::sqrt(grid->T));
    std::vector<double> ball_radii;
    for (double r : radii)
        if (r > 0.0 && r < rmax) ball_radii.push_back(r);
    NondegReport nd;
    if (!ball_radii.empty()) nd = nondegeneracy(lf.field, spec, ball_radii, theta);
    write_nondeg_json(nd, out_dir + "/nondeg_report.json");

    if (!quiet)
        std::printf("diagnose: kinetic %.6e (c_est %.6e), derivative-law l1 %.3e, "
                    "nondeg min ratio %.4f (%s)\n",
                    er.kinetic_total, er.c_est, dl.residual_l1, nd.min_ratio,
                    nd.empty ? "empty" : (nd.pass ? "pass" : "fail"));
    return 0;
}

} // namespace wied
