#include "wied/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

#include <json.hpp>

#include "wied/errors.hpp"
#include "wied/reference.hpp"
#include "wied/util.hpp"

namespace wied {

namespace {

// integral of the piecewise-linear interpolant of (t, g) over [a, b]
double pl_integral(const std::vector<double>& t, const std::vector<double>& g,
                   double a, double b) {
    const std::size_t n = t.size();
    auto value = [&](double x) {
        std::size_t c = 0;
        while (c + 2 < n && t[c + 1] < x) ++c;
        const double s = (x - t[c]) / (t[c + 1] - t[c]);
        return g[c] + s * (g[c + 1] - g[c]);
    };
    Accum acc;
    double lo = a;
    for (std::size_t c = 0; c + 1 < n && lo < b; ++c) {
        if (t[c + 1] <= lo) continue;
        const double hi = std::min(b, t[c + 1]);
        acc.add(0.5 * (value(lo) + value(hi)) * (hi - lo));
        lo = hi;
    }
    return acc.value();
}

double slice_h1_l2_sq(const SpaceTimeGrid& g, const std::vector<double>& u0) {
    const int nj = g.dim == 2 ? g.nx[1] : 0;
    const int ldj = nj + 1;
    auto s = [&](int i, int j) { return static_cast<std::size_t>(i) * ldj + j; };
    Accum acc;
    for (int i = 0; i < g.nx[0]; ++i)
        for (int j = 0; j <= nj; ++j) {
            const double ty = g.dim == 2 ? g.mass_x1(j) : 1.0;
            const double d = (u0[s(i + 1, j)] - u0[s(i, j)]) / g.h[0];
            acc.add(d * d * g.h[0] * ty);
        }
    if (g.dim == 2)
        for (int j = 0; j < g.nx[1]; ++j)
            for (int i = 0; i <= g.nx[0]; ++i) {
                const double d = (u0[s(i, j + 1)] - u0[s(i, j)]) / g.h[1];
                acc.add(d * d * g.h[1] * g.mass_x0(i));
            }
    std::size_t n = 0;
    for (int i = 0; i <= g.nx[0]; ++i)
        for (int j = 0; j <= nj; ++j, ++n) acc.add(g.mass(i, j) * u0[n] * u0[n]);
    return acc.value();
}

} // namespace

EnergyEstimateReport check_energy_bounds(const ScalarField& u, const ProblemSpec& spec,
                                         const std::vector<double>& radii, double margin) {
    validate_spec(spec);
    check_finite(u, "check_energy_bounds");
    if (!(margin >= 1.0))
        throw parameter_error("check_energy_bounds: margin must be >= 1");
    const SpaceTimeGrid& g = *u.grid;
    const int nj = g.dim == 2 ? g.nx[1] : 0;

    EnergyEstimateReport rep;
    rep.margin = margin;

    // direct time-derivative integral, midpoint cells
    {
        Accum acc;
        for (int k = 0; k < g.nt; ++k) {
            Accum sl;
            for (int i = 0; i <= g.nx[0]; ++i)
                for (int j = 0; j <= nj; ++j) {
                    const double d = (u.at(k + 1, i, j) - u.at(k, i, j)) / g.dt;
                    sl.add(g.mass(i, j) * d * d);
                }
            acc.add(sl.value() * g.dt);
        }
        rep.kinetic_total = acc.value();
    }

    const EnergyTrace tr = energy_trace(u, spec);
    {
        Accum acc;
        for (double im : tr.I_mid) acc.add(im * tr.dtau);
        rep.kinetic_total_scaled = acc.value() / spec.epsilon;
    }

    {
        const std::vector<double> u0 = sample_initial(spec.initial, g, spec.gamma);
        Accum pot;
        std::size_t n = 0;
        for (int i = 0; i <= g.nx[0]; ++i)
            for (int j = 0; j <= nj; ++j, ++n)
                pot.add(g.mass(i, j) * potential(u0[n], spec.gamma));
        rep.c_est = slice_h1_l2_sq(g, u0) + 2.0 * pot.value();
    }

    // slab integrand in real time: dirichlet + potential slice integral
    std::vector<double> treal(tr.t.size()), gslab(tr.t.size());
    for (std::size_t k = 0; k < tr.t.size(); ++k) {
        treal[k] = tr.t[k] * spec.epsilon;
        gslab[k] = tr.R[k] / spec.epsilon;
    }
    for (double r : radii) {
        if (r < spec.epsilon * (1.0 - 1e-12) || r > g.T * (1.0 + 1e-12)) {
            rep.rejected_radii.push_back(r);
            continue;
        }
        SlabRow row;
        row.r = r;
        row.integral = pl_integral(treal, gslab, 0.0, std::min(r, g.T));
        row.ratio = row.integral / r;
        rep.slab_table.push_back(row);
    }

    const double horizon = g.T / spec.epsilon;
    for (int rr = 0; rr + 1 <= static_cast<int>(horizon + 1e-9) && rr < 16; ++rr) {
        SlabRow row;
        row.r = rr;
        row.integral = pl_integral(tr.t, gslab, rr, rr + 1.0);
        row.ratio = rep.c_est > 0.0 ? row.integral / rep.c_est : 0.0;
        rep.scaled_slab_table.push_back(row);
    }

    rep.kinetic_ok = rep.kinetic_total <= rep.c_est;
    rep.slabs_ok = true;
    for (const SlabRow& row : rep.slab_table)
        if (row.integral > rep.c_est * row.r * rep.margin) rep.slabs_ok = false;
    return rep;
}

DerivLawReport check_derivative_law(const EnergyTrace& tr) {
    DerivLawReport rep;
    const std::size_t n = tr.E.size();
    if (n < 2) return rep;
    rep.e0 = tr.E[0];
    rep.max_E_increase = -std::numeric_limits<double>::infinity();
    Accum l1;
    for (std::size_t k = 0; k + 1 < n; ++k) {
        const double de = (tr.E[k + 1] - tr.E[k]) / tr.dtau;
        const double ihalf = 0.5 * (tr.I[k] + tr.I[k + 1]);
        l1.add(tr.dtau * std::abs(de + 2.0 * ihalf));
        rep.max_E_increase = std::max(rep.max_E_increase, tr.E[k + 1] - tr.E[k]);
        const double cross = std::abs(de - (tr.E[k] - tr.I[k] - tr.R[k]));
        rep.cross_check_max = std::max(rep.cross_check_max, cross);
    }
    rep.residual_l1 = l1.value();
    rep.monotone = rep.max_E_increase <= 1e-10 * rep.e0;
    return rep;
}

std::vector<SpaceTimeGrid::Node> extract_free_boundary(const ScalarField& u,
                                                       double theta) {
    if (!(theta > 0.0)) throw parameter_error("extract_free_boundary: theta must be > 0");
    const SpaceTimeGrid& g = *u.grid;
    const int nj = g.dim == 2 ? g.nx[1] : 0;
    std::vector<SpaceTimeGrid::Node> out;
    for (int k = 1; k <= g.nt; ++k)
        for (int i = 0; i <= g.nx[0]; ++i)
            for (int j = 0; j <= nj; ++j) {
                if (u.at(k, i, j) > theta) continue;
                bool hot = false;
                if (k > 0) hot = hot || u.at(k - 1, i, j) > theta;
                if (k < g.nt) hot = hot || u.at(k + 1, i, j) > theta;
                if (i > 0) hot = hot || u.at(k, i - 1, j) > theta;
                if (i < g.nx[0]) hot = hot || u.at(k, i + 1, j) > theta;
                if (g.dim == 2) {
                    if (j > 0) hot = hot || u.at(k, i, j - 1) > theta;
                    if (j < nj) hot = hot || u.at(k, i, j + 1) > theta;
                }
                if (hot) out.push_back({k, i, j});
            }
    return out;
}

NondegReport nondegeneracy(const ScalarField& u, const ProblemSpec& spec,
                           const std::vector<double>& radii, double theta) {
    check_finite(u, "nondegeneracy");
    const SpaceTimeGrid& g = *u.grid;
    NondegReport rep;
    rep.c_theory = 1.0 / (2.0 * (g.dim + 2));
    rep.radii = radii;

    double halfwidth = 0.5 * (g.b[0] - g.a[0]);
    if (g.dim == 2) halfwidth = std::min(halfwidth, 0.5 * (g.b[1] - g.a[1]));
    const double rmax = 0.5 * std::min(halfwidth, std::sqrt(g.T));
    for (double r : radii)
        if (!(r > 0.0) || r >= rmax)
            throw parameter_error("nondegeneracy: radius " + std::to_string(r) +
                                  " outside (0, " + std::to_string(rmax) + ")");
    (void)spec;

    rep.fb_points = extract_free_boundary(u, theta);
    rep.min_ratio = std::numeric_limits<double>::infinity();
    for (const auto& p : rep.fb_points) {
        const std::array<double, 2> c{g.x0(p.i), g.dim == 2 ? g.x1(p.j) : 0.0};
        const double tau = g.time(p.k);
        for (double r : radii) {
            const RegionIndexSet ball = ball_indices(g, c, tau, r);
            if (ball.clipped) {
                ++rep.n_skipped;
                continue;
            }
            NondegSample s;
            s.p = p;
            s.r = r;
            s.sup_u = 0.0;
            for (std::size_t n : ball.nodes) s.sup_u = std::max(s.sup_u, u.v[n]);
            s.ratio = s.sup_u / (r * r);
            rep.min_ratio = std::min(rep.min_ratio, s.ratio);
            rep.samples.push_back(s);
        }
    }
    rep.empty = rep.samples.empty();
    if (rep.empty) {
        rep.min_ratio = 0.0;
        rep.pass = true;  // nothing to test is not a failure
    } else {
        rep.pass = rep.min_ratio >= rep.c_theory * (1.0 - rep.tol_nd);
    }
    return rep;
}

double chi_mismatch(const ScalarField& a, const ScalarField& b, double theta) {
    if (!(theta > 0.0)) throw parameter_error("chi_mismatch: theta must be > 0");
    const SpaceTimeGrid& g = *a.grid;
    if (b.grid->node_count() != g.node_count() || !g.same_box(*b.grid))
        throw domain_error("chi_mismatch: fields live on different grids");
    const int nj = g.dim == 2 ? g.nx[1] : 0;
    std::size_t total = 0, differ = 0;
    for (int k = 1; k <= g.nt; ++k)
        for (int i = 1; i < g.nx[0]; ++i) {
            const int jlo = g.dim == 2 ? 1 : 0;
            const int jhi = g.dim == 2 ? nj - 1 : 0;
            for (int j = jlo; j <= jhi; ++j) {
                ++total;
                const bool pa = a.at(k, i, j) > theta;
                const bool pb = b.at(k, i, j) > theta;
                if (pa != pb) ++differ;
            }
        }
    return total == 0 ? 0.0 : static_cast<double>(differ) / static_cast<double>(total);
}

double l2_error_cylinder(const ScalarField& a, const ScalarField& b, double r) {
    const SpaceTimeGrid& g = *a.grid;
    if (b.grid->node_count() != g.node_count() || !g.same_box(*b.grid))
        throw domain_error("l2_error_cylinder: fields live on different grids");
    const RegionIndexSet cyl = cylinder_indices(g, r);
    Accum acc;
    for (std::size_t n : cyl.nodes) {
        const auto p = g.decode(n);
        const double d = a.v[n] - b.v[n];
        acc.add(d * d * g.mass(p.i, p.j) * g.dt);
    }
    return std::sqrt(std::max(acc.value(), 0.0));
}

ConvergenceReport eps_sweep(const ProblemSpec& base, const std::vector<double>& eps_list,
                            GridPtr grid, const SolverConfig& config, double r_region,
                            double theta) {
    if (eps_list.empty()) throw parameter_error("eps_sweep: eps_list must not be empty");
    for (std::size_t s = 1; s < eps_list.size(); ++s)
        if (!(eps_list[s] < eps_list[s - 1]))
            throw parameter_error("eps_sweep: eps_list must be strictly decreasing");

    ConvergenceReport rep;
    rep.eps_list = eps_list;
    rep.r_region = r_region;
    rep.theta = theta;

    const ParabolicRun ref = solve_parabolic(base, grid, config);

    // oracle discretization floor: compare against a time-refined reference
    {
        std::array<std::array<double, 2>, 2> ext{{{grid->a[0], grid->b[0]},
                                                  {grid->a[1], grid->b[1]}}};
        GridPtr fine = make_grid(grid->dim, ext, grid->nx, grid->T, grid->nt * 2);
        const ParabolicRun ref_fine = solve_parabolic(base, fine, config);
        const ScalarField back = restrict_field(ref_fine.u, grid);
        rep.oracle_floor = l2_error_cylinder(ref.u, back, r_region);
    }

    for (double eps : eps_list) {
        SweepRow row;
        row.eps = eps;
        ProblemSpec spec = base;
        spec.epsilon = eps;
        try {
            auto [u, sr] = minimize(spec, grid, config);
            row.converged = sr.converged;
            row.l2_error = l2_error_cylinder(u, ref.u, r_region);
            row.chi = chi_mismatch(u, ref.u, theta);
        } catch (const nonconvergence_error& e) {
            row.converged = false;
            row.note = e.what();
        }
        rep.rows.push_back(row);
    }

    rep.errors_monotone = true;
    rep.mismatch_monotone = true;
    for (std::size_t s = 0; s < rep.rows.size(); ++s) {
        if (!rep.rows[s].converged) {
            rep.errors_monotone = false;
            rep.mismatch_monotone = false;
            break;
        }
        if (s > 0) {
            if (rep.rows[s].l2_error > 1.05 * rep.rows[s - 1].l2_error)
                rep.errors_monotone = false;
            if (rep.rows[s].chi > 1.05 * rep.rows[s - 1].chi + 1e-12)
                rep.mismatch_monotone = false;
        }
    }
    if (!rep.rows.empty() && rep.rows.back().converged)
        rep.floor_reached = rep.rows.back().l2_error <= 2.0 * rep.oracle_floor;
    return rep;
}

namespace {

void write_json_file(const nlohmann::json& j, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw data_error("cannot open " + path);
    out << j.dump(2) << "\n";
}

nlohmann::json slab_rows(const std::vector<SlabRow>& rows) {
    auto arr = nlohmann::json::array();
    for (const SlabRow& r : rows)
        arr.push_back({{"r", r.r}, {"integral", r.integral}, {"ratio", r.ratio}});
    return arr;
}

} // namespace

void write_energy_report_json(const EnergyEstimateReport& r, const std::string& path) {
    nlohmann::json j;
    j["kinetic_total"] = r.kinetic_total;
    j["kinetic_total_scaled"] = r.kinetic_total_scaled;
    j["c_est"] = r.c_est;
    j["margin"] = r.margin;
    j["slab_table"] = slab_rows(r.slab_table);
    j["scaled_slab_table"] = slab_rows(r.scaled_slab_table);
    j["rejected_radii"] = r.rejected_radii;
    j["kinetic_ok"] = r.kinetic_ok;
    j["slabs_ok"] = r.slabs_ok;
    write_json_file(j, path);
}

void write_slab_csv(const EnergyEstimateReport& r, const std::string& path) {
    std::FILE* f = std::fopen(path.c_str(), "w");
    if (!f) throw data_error("write_slab_csv: cannot open " + path);
    std::fprintf(f, "r,integral,ratio\n");
    for (const SlabRow& row : r.slab_table)
        std::fprintf(f, "%.17g,%.17g,%.17g\n", row.r, row.integral, row.ratio);
    std::fclose(f);
}

void write_derivlaw_json(const DerivLawReport& r, const std::string& path) {
    nlohmann::json j;
    j["residual_l1"] = r.residual_l1;
    j["max_E_increase"] = r.max_E_increase;
    j["cross_check_max"] = r.cross_check_max;
    j["monotone"] = r.monotone;
    j["E0"] = r.e0;
    write_json_file(j, path);
}

void write_nondeg_json(const NondegReport& r, const std::string& path) {
    nlohmann::json j;
    auto pts = nlohmann::json::array();
    for (const auto& p : r.fb_points) pts.push_back({{"k", p.k}, {"i", p.i}, {"j", p.j}});
    j["fb_points"] = pts;
    j["radii"] = r.radii;
    auto samples = nlohmann::json::array();
    for (const auto& s : r.samples)
        samples.push_back({{"k", s.p.k},
                           {"i", s.p.i},
                           {"j", s.p.j},
                           {"r", s.r},
                           {"sup_u", s.sup_u},
                           {"ratio", s.ratio}});
    j["samples"] = samples;
    j["n_skipped"] = r.n_skipped;
    j["min_ratio"] = r.min_ratio;
    j["c_theory"] = r.c_theory;
    j["tol_nd"] = r.tol_nd;
    j["empty"] = r.empty;
    j["pass"] = r.pass;
    write_json_file(j, path);
}

void write_sweep_json(const ConvergenceReport& r, const std::string& path) {
    nlohmann::json j;
    j["eps_list"] = r.eps_list;
    auto rows = nlohmann::json::array();
    for (const SweepRow& row : r.rows)
        rows.push_back({{"eps", row.eps},
                        {"l2_error", row.l2_error},
                        {"chi_mismatch", row.chi},
                        {"converged", row.converged},
                        {"note", row.note}});
    j["rows"] = rows;
    j["oracle_floor"] = r.oracle_floor;
    j["r_region"] = r.r_region;
    j["theta"] = r.theta;
    j["errors_monotone"] = r.errors_monotone;
    j["mismatch_monotone"] = r.mismatch_monotone;
    j["floor_reached"] = r.floor_reached;
    write_json_file(j, path);
}

void write_sweep_csv(const ConvergenceReport& r, const std::string& path) {
    std::FILE* f = std::fopen(path.c_str(), "w");
    if (!f) throw data_error("write_sweep_csv: cannot open " + path);
    std::fprintf(f, "eps,l2_error,chi_mismatch\n");
    for (const SweepRow& row : r.rows)
        std::fprintf(f, "%.17g,%.17g,%.17g\n", row.eps, row.l2_error, row.chi);
    std::fclose(f);
}

} // namespace wied
