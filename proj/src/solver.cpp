#include "wied/solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

#include "wied/linalg.hpp"
#include "wied/util.hpp"

namespace wied {

void validate_config(const SolverConfig& c) {
    if (!(c.tol_grad > 0.0)) throw parameter_error("solver: tol_grad must be positive");
    if (c.max_newton < 1) throw parameter_error("solver: max_newton must be >= 1");
    if (!(c.linear_tol > 0.0)) throw parameter_error("solver: linear_tol must be positive");
    if (c.linear_maxit < 1) throw parameter_error("solver: linear_maxit must be >= 1");
    if (c.sigma_schedule.empty())
        throw parameter_error("solver: sigma_schedule must not be empty");
    for (std::size_t s = 0; s < c.sigma_schedule.size(); ++s) {
        if (c.sigma_schedule[s] < 0.0)
            throw parameter_error("solver: sigma_schedule entries must be >= 0");
        if (s > 0 && !(c.sigma_schedule[s] < c.sigma_schedule[s - 1]))
            throw parameter_error("solver: sigma_schedule must be strictly decreasing");
    }
    if (!(c.armijo.c1 > 0.0 && c.armijo.c1 < 1.0))
        throw parameter_error("solver: armijo c1 must lie in (0,1)");
    if (!(c.armijo.shrink > 0.0 && c.armijo.shrink < 1.0))
        throw parameter_error("solver: armijo shrink must lie in (0,1)");
}

double positivity_threshold(double tol_grad, double max_u0) {
    return std::max(10.0 * tol_grad, 1e-8 * max_u0);
}

namespace {

struct SolveCtx {
    ProblemSpec spec;
    GridPtr grid;
    SolverConfig cfg;
    FunctionalMode mode;
    std::vector<unsigned char> pinned;
    std::vector<double> data;   // values held on pinned rows
    std::vector<double> svec;   // row scale: somega[m] * mass(i,j), floored
    std::vector<double> diag;   // Jacobi diagonal of the current operator
    double max_u0 = 0.0;
    double scale = 1.0;         // residual scale: max(first residual, f scale)
};

// max-norm row-scaled complementarity residual; gradient uses f(0)=0
double residual_norm(const SolveCtx& ctx, const ScalarField& u, double sigma) {
    ScalarField G = energy_gradient_mode(u, ctx.spec, ctx.mode, sigma,
                                         ctx.cfg.weight_floor);
    const bool cone = ctx.spec.gamma == 1.0 && sigma == 0.0;
    double res = 0.0;
    for (std::size_t n = 0; n < G.v.size(); ++n) {
        if (ctx.pinned[n]) continue;
        const double rsc = G.v[n] / ctx.svec[n];
        double phi;
        if (cone && u.v[n] <= 0.0)
            phi = std::max(-rsc - 1.0, 0.0);  // multiplier must stay nonnegative
        else
            phi = std::abs(rsc);
        const double pen = std::max(0.0, -u.v[n]) / (1.0 + ctx.max_u0);
        res = std::max({res, phi, pen});
    }
    return res;
}

double dot_free(const std::vector<double>& a, const std::vector<double>& b) {
    Accum s;
    for (std::size_t n = 0; n < a.size(); ++n) s.add(a[n] * b[n]);
    return s.value();
}

double cg_forcing(const SolveCtx& ctx, double res) {
    const double rel = res / ctx.scale;
    return std::clamp(0.01 * rel, ctx.cfg.linear_tol, 1e-4);
}

// exact minimizer of the energy in one coordinate at sigma = 0:
// root of A + B w + s f_gamma(w), B > 0, f one-sided for gamma > 1
double row_root(double A, double B, double s, double gamma, double gtol) {
    if (gamma == 1.0) {
        const double up = -(A + s * gamma) / B;
        if (up > 0.0) return up;
        const double dn = -A / B;
        return dn < 0.0 ? dn : 0.0;
    }
    if (A >= 0.0) return -A / B;
    // unique positive root; bisection survives the infinite slope at 0
    double lo = 0.0, hi = -A / B;
    for (int it = 0; it < 200 && hi - lo > 1e-18 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double gm = A + B * mid + s * gamma * std::pow(mid, gamma - 1.0);
        if (std::abs(gm) <= gtol) return mid;
        (gm < 0.0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

// Gauss-Seidel pass of exact single-row solves: coordinate descent on the
// energy, so it never increases it; picks up rows near the contact set where
// u is tiny and the Newton model (clamped f') systematically overshoots
void gs_sweep(SolveCtx& ctx, ScalarField& u, double tol_abs) {
    const SpaceTimeGrid& g = *ctx.grid;
    EllipticOperator op =
        make_operator(u, ctx.spec, ctx.mode, 0.0, ctx.cfg.weight_floor);
    const int nj = g.dim == 2 ? g.nx[1] : 0;
    const int sj = nj + 1;
    const std::size_t sn = g.spatial_nodes();
    const double ihx = 1.0 / g.h[0];
    const double ihy = g.dim == 2 ? 1.0 / g.h[1] : 0.0;
    for (int m = 1; m <= g.nt; ++m) {
        double* um = u.v.data() + m * sn;
        const double* udn = u.v.data() + (m - 1) * sn;
        const double* uup = m < g.nt ? u.v.data() + (m + 1) * sn : nullptr;
        for (int i = 0; i <= g.nx[0]; ++i)
            for (int j = 0; j <= nj; ++j) {
                const std::size_t loc = static_cast<std::size_t>(i) * sj + j;
                const std::size_t n = m * sn + loc;
                if (ctx.pinned[n]) continue;
                double sp = 0.0, ld = 0.0;  // spatial row action and its diagonal
                if (g.dim == 1) {
                    if (i > 0) { sp += (um[loc] - um[loc - 1]) * ihx; ld += ihx; }
                    if (i < g.nx[0]) { sp += (um[loc] - um[loc + 1]) * ihx; ld += ihx; }
                } else {
                    const double mx = g.mass_x0(i), my = g.mass_x1(j);
                    if (i > 0) { sp += my * (um[loc] - um[loc - sj]) * ihx; ld += my * ihx; }
                    if (i < g.nx[0]) { sp += my * (um[loc] - um[loc + sj]) * ihx; ld += my * ihx; }
                    if (j > 0) { sp += mx * (um[loc] - um[loc - 1]) * ihy; ld += mx * ihy; }
                    if (j < nj) { sp += mx * (um[loc] - um[loc + 1]) * ihy; ld += mx * ihy; }
                }
                const double M = g.mass(i, j);
                double t = M * op.ctm[m] * (um[loc] - udn[loc]);
                if (uup) t -= M * op.ctp[m] * (uup[loc] - um[loc]);
                const double B = M * (op.ctm[m] + op.ctp[m]) + op.somega[m] * ld;
                const double A = t + op.somega[m] * sp - B * um[loc];
                const double s = ctx.svec[n];
                um[loc] = row_root(A, B, s, ctx.spec.gamma, 0.01 * tol_abs * s);
            }
    }
}

// damped Newton on the sigma-smoothed energy; returns true when stage_tol hit
bool newton_stage(SolveCtx& ctx, ScalarField& u, double sigma, double stage_tol,
                  int budget, SolveReport& rep) {
    const std::size_t N = u.v.size();
    std::vector<double> delta(N), b(N);
    ScalarField trial(u.grid);

    for (int it = 0; it < budget; ++it) {
        const double res = residual_norm(ctx, u, sigma);
        if (res <= stage_tol) return true;

        EllipticOperator op =
            make_operator(u, ctx.spec, ctx.mode, sigma, ctx.cfg.weight_floor);
        op.diagonal(ctx.diag.data());
        ScalarField G = energy_gradient_mode(u, ctx.spec, ctx.mode, sigma,
                                             ctx.cfg.weight_floor);
        for (std::size_t n = 0; n < N; ++n) b[n] = ctx.pinned[n] ? 0.0 : -G.v[n];
        std::fill(delta.begin(), delta.end(), 0.0);
        const PcgResult lin =
            pcg([&op](const double* in, double* out) { op.apply(in, out); }, ctx.diag,
                ctx.pinned, b, delta, cg_forcing(ctx, res), ctx.cfg.linear_maxit);
        rep.cg_iterations += lin.iters;

        const double dd = dot_free(G.v, delta);
        const EnergyBreakdown e0 = energy_mode(u, ctx.spec, ctx.mode, sigma);
        double alpha = 1.0;
        bool accepted = false;
        for (int bt = 0; dd < 0.0 && bt <= ctx.cfg.armijo.max_backtrack; ++bt) {
            for (std::size_t n = 0; n < N; ++n) trial.v[n] = u.v[n] + alpha * delta[n];
            const EnergyBreakdown e1 = energy_mode(trial, ctx.spec, ctx.mode, sigma);
            // roundoff slack: refinement steps predict decreases below the
            // resolution of the energy difference itself
            const double slack = 1e-14 * std::abs(e0.total);
            if (e1.total <= e0.total + ctx.cfg.armijo.c1 * alpha * dd + slack) {
                u.v = trial.v;
                accepted = true;
                break;
            }
            alpha *= ctx.cfg.armijo.shrink;
        }
        ++rep.iterations;

        if (!accepted) {
            // projected gradient fallback: diagonal-scaled descent with
            // truncation (never increases the energy)
            rep.message += "linesearch fallback; ";
            double ecur = e0.total;
            for (int pg = 0; pg < 10; ++pg) {
                double step = 1.0;
                bool ok = false;
                for (int bt = 0; bt < 30; ++bt) {
                    for (std::size_t n = 0; n < N; ++n) {
                        if (ctx.pinned[n]) {
                            trial.v[n] = u.v[n];
                            continue;
                        }
                        trial.v[n] = std::max(u.v[n] - step * G.v[n] / ctx.diag[n], 0.0);
                    }
                    const EnergyBreakdown e1 = energy_mode(trial, ctx.spec, ctx.mode, sigma);
                    if (e1.total < ecur) {
                        u.v = trial.v;
                        ecur = e1.total;
                        ok = true;
                        break;
                    }
                    step *= 0.5;
                }
                if (!ok) break;
                G = energy_gradient_mode(u, ctx.spec, ctx.mode, sigma,
                                         ctx.cfg.weight_floor);
            }
        }
        // mop up the contact-set rows the Newton model cannot resolve
        if (sigma == 0.0 && ctx.spec.gamma > 1.0) gs_sweep(ctx, u, stage_tol);
        if (rep.iterations >= ctx.cfg.max_newton) return false;
    }
    return residual_norm(ctx, u, sigma) <= stage_tol;
}

// primal-dual active set for gamma=1 at sigma=0; the energy is quadratic
// plus a linear term on the cone {u >= 0}
bool pdas_stage(SolveCtx& ctx, ScalarField& u, double tol_abs, int budget,
                SolveReport& rep) {
    const std::size_t N = u.v.size();
    EllipticOperator op =
        make_operator(u, ctx.spec, ctx.mode, 0.0, ctx.cfg.weight_floor);
    op.diagonal(ctx.diag.data());  // gamma=1: f' == 0, operator is constant

    std::vector<double> g(N), b(N), delta(N);
    std::vector<unsigned char> mask(N);

    for (int it = 0; it < budget; ++it) {
        const double res = residual_norm(ctx, u, 0.0);
        if (res <= tol_abs) return true;

        // cone gradient: f == 1 on every free row
        op.apply_full(u.v.data(), g.data());
        for (std::size_t n = 0; n < N; ++n)
            if (!ctx.pinned[n]) g[n] += ctx.svec[n];

        for (std::size_t n = 0; n < N; ++n) {
            mask[n] = ctx.pinned[n];
            if (!ctx.pinned[n] && u.v[n] - g[n] / ctx.diag[n] < 0.0) {
                mask[n] = 1;
                u.v[n] = 0.0;
            }
        }

        op.apply_full(u.v.data(), g.data());
        for (std::size_t n = 0; n < N; ++n) {
            if (mask[n]) {
                b[n] = 0.0;
                continue;
            }
            b[n] = -(g[n] + ctx.svec[n]);
        }
        std::fill(delta.begin(), delta.end(), 0.0);
        const PcgResult lin =
            pcg([&op, &mask](const double* in, double* out) {
                    op.apply_masked(in, out, mask.data());
                },
                ctx.diag, mask, b, delta, cg_forcing(ctx, res), ctx.cfg.linear_maxit);
        rep.cg_iterations += lin.iters;
        for (std::size_t n = 0; n < N; ++n) u.v[n] += delta[n];
        ++rep.iterations;
        if (rep.iterations >= ctx.cfg.max_newton) return false;
    }
    return residual_norm(ctx, u, 0.0) <= tol_abs;
}

std::pair<ScalarField, SolveReport> solve_mode(const ProblemSpec& spec, GridPtr grid,
                                               const SolverConfig& config,
                                               const FunctionalMode& mode,
                                               const ScalarField* start) {
    const auto t_start = std::chrono::steady_clock::now();
    validate_spec(spec);
    validate_config(config);
    if (grid->dim != spec.dim)
        throw parameter_error("minimize: grid dimension does not match the problem");

    SolveCtx ctx{spec, grid, config, mode, pinned_mask(*grid, spec.bc), {}, {}, {}, 0.0, 1.0};
    const std::vector<double> u0 = sample_initial(spec.initial, *grid, spec.gamma);
    for (double x : u0) ctx.max_u0 = std::max(ctx.max_u0, x);

    const std::size_t sn = grid->spatial_nodes();
    ctx.data.resize(grid->node_count());
    for (int k = 0; k <= grid->nt; ++k)
        std::copy(u0.begin(), u0.end(), ctx.data.begin() + k * sn);

    ScalarField u(grid);
    if (start) {
        if (start->grid->node_count() != grid->node_count())
            throw domain_error("minimize: start field lives on a different grid");
        check_finite(*start, "minimize start");
        u.v = start->v;
        for (std::size_t n = 0; n < u.v.size(); ++n)
            if (ctx.pinned[n]) u.v[n] = ctx.data[n];
    } else {
        u.v = ctx.data;  // time-constant extension of the datum
    }

    {
        EllipticOperator op = make_operator(u, spec, mode, 0.0, config.weight_floor);
        ctx.svec.resize(grid->node_count());
        ctx.diag.resize(grid->node_count());
        const int nj = grid->dim == 2 ? grid->nx[1] : 0;
        std::size_t n = 0;
        for (int m = 0; m <= grid->nt; ++m)
            for (int i = 0; i <= grid->nx[0]; ++i)
                for (int j = 0; j <= nj; ++j, ++n)
                    ctx.svec[n] = op.somega[m] * grid->mass(i, j);
    }

    SolveReport rep;
    rep.max_u0 = ctx.max_u0;

    const double r0 = residual_norm(ctx, u, 0.0);
    rep.initial_residual = r0;
    ctx.scale = std::max(r0, f_gamma(ctx.max_u0, spec.gamma));
    const double tol_abs = config.tol_grad * ctx.scale;

    bool done = (r0 <= tol_abs) || ctx.scale == 0.0;
    if (!done) {
        // smoothing stages are globalization aids; skip them near a solution
        const bool warm = r0 <= 1e-4 * ctx.scale;
        for (std::size_t s = 0; s < config.sigma_schedule.size() && !done; ++s) {
            const double sigma = config.sigma_schedule[s];
            const bool last = s + 1 == config.sigma_schedule.size();
            if (sigma > 0.0) {
                if (warm) continue;
                const double stage_tol = std::max(tol_abs, 0.03 * sigma * ctx.scale);
                const int budget = std::max(5, config.max_newton / 8);
                newton_stage(ctx, u, sigma, stage_tol, budget, rep);
                if (rep.iterations >= config.max_newton) break;
            } else {
                const int budget = config.max_newton - rep.iterations;
                if (spec.gamma == 1.0)
                    done = pdas_stage(ctx, u, tol_abs, budget, rep);
                else
                    done = newton_stage(ctx, u, 0.0, tol_abs, budget, rep);
            }
            if (last && !done) break;
        }
    }

    check_finite(u, "minimize");
    rep.final_residual = residual_norm(ctx, u, 0.0);
    rep.converged = rep.final_residual <= tol_abs || ctx.scale == 0.0;
    rep.energy = energy_mode(u, spec, mode, 0.0);
    rep.min_u = *std::min_element(u.v.begin(), u.v.end());
    rep.max_u = *std::max_element(u.v.begin(), u.v.end());
    rep.wall_time_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();

    if (!rep.converged)
        throw nonconvergence_error(
            "solver stopped at residual " + std::to_string(rep.final_residual) +
                " (target " + std::to_string(tol_abs) + ") after " +
                std::to_string(rep.iterations) + " iterations",
            rep);
    return {std::move(u), rep};
}

} // namespace

std::pair<ScalarField, SolveReport> minimize(const ProblemSpec& spec, GridPtr grid,
                                             const SolverConfig& config,
                                             const ScalarField* start) {
    return solve_mode(spec, grid, config, mode_weighted(spec), start);
}

std::pair<ScalarField, SolveReport> solve_scaled(const ProblemSpec& spec, GridPtr grid_v,
                                                 const SolverConfig& config,
                                                 const ScalarField* start) {
    return solve_mode(spec, grid_v, config, mode_scaled(spec), start);
}

ScalarField el_residual(const ScalarField& u, const ProblemSpec& spec) {
    check_finite(u, "el_residual");
    const SpaceTimeGrid& g = *u.grid;
    const FunctionalMode mode = mode_weighted(spec);
    const double ratio = mode.kin / mode.spat;
    const double rho = std::exp(-mode.decay * g.dt);
    const double a_int = 2.0 / (1.0 + rho);
    const double b_int = 2.0 * rho / (1.0 + rho);
    const double idt2 = 1.0 / (g.dt * g.dt);
    const std::vector<unsigned char> pin = pinned_mask(g, spec.bc);

    ScalarField r(u.grid);
    const int nj = g.dim == 2 ? g.nx[1] : 0;
    for (int m = 1; m <= g.nt; ++m) {
        const double am = m < g.nt ? a_int : 2.0;
        const double bm = m < g.nt ? b_int : 0.0;
        for (int i = 0; i <= g.nx[0]; ++i)
            for (int j = 0; j <= nj; ++j) {
                const std::size_t n = g.index(m, i, j);
                if (pin[n]) continue;
                const double um = u.v[n];
                const double umm = u.at(m - 1, i, j);
                const double ump = m < g.nt ? u.at(m + 1, i, j) : 0.0;
                double t = am * (um - umm);
                if (m < g.nt) t -= bm * (ump - um);
                // mirrored -Laplacian, mass-normalized
                double lap = 0.0;
                const double ihx2 = 1.0 / (g.h[0] * g.h[0]);
                const double l = i > 0 ? u.at(m, i - 1, j) : u.at(m, i + 1, j);
                const double rr = i < g.nx[0] ? u.at(m, i + 1, j) : u.at(m, i - 1, j);
                lap += (2.0 * um - l - rr) * ihx2;
                if (g.dim == 2) {
                    const double ihy2 = 1.0 / (g.h[1] * g.h[1]);
                    const double d = j > 0 ? u.at(m, i, j - 1) : u.at(m, i, j + 1);
                    const double up = j < g.nx[1] ? u.at(m, i, j + 1) : u.at(m, i, j - 1);
                    lap += (2.0 * um - d - up) * ihy2;
                }
                r.v[n] = ratio * t * idt2 + lap + f_gamma(um, spec.gamma);
            }
    }
    return r;
}

DoubleIneqReport double_inequality_check(const ScalarField& u, const ProblemSpec& spec,
                                         double theta) {
    if (spec.gamma != 1.0)
        throw usage_error("double_inequality_check requires gamma = 1");
    check_finite(u, "double_inequality_check");
    const SpaceTimeGrid& g = *u.grid;

    DoubleIneqReport rep;
    rep.theta = theta;
    rep.max_L_minus_1 = -std::numeric_limits<double>::infinity();
    rep.min_L_on_positive = std::numeric_limits<double>::infinity();

    const double idt2 = 1.0 / (g.dt * g.dt);
    const double i2dt = 1.0 / (2.0 * g.dt);
    const int nj = g.dim == 2 ? g.nx[1] : 0;
    for (int m = 1; m < g.nt; ++m)
        for (int i = 1; i < g.nx[0]; ++i)
            for (int j = (g.dim == 2 ? 1 : 0); j <= (g.dim == 2 ? g.nx[1] - 1 : 0); ++j) {
                const double um = u.at(m, i, j);
                const double up = u.at(m + 1, i, j);
                const double dn = u.at(m - 1, i, j);
                double lap = (u.at(m, i - 1, j) + u.at(m, i + 1, j) - 2.0 * um) /
                             (g.h[0] * g.h[0]);
                if (g.dim == 2)
                    lap += (u.at(m, i, j - 1) + u.at(m, i, j + 1) - 2.0 * um) /
                           (g.h[1] * g.h[1]);
                const double L = spec.epsilon * (up - 2.0 * um + dn) * idt2 + lap -
                                 (up - dn) * i2dt;
                ++rep.n_interior;
                rep.max_L_minus_1 = std::max(rep.max_L_minus_1, L - 1.0);
                if (um > theta) {
                    ++rep.n_positive;
                    rep.min_L_on_positive = std::min(rep.min_L_on_positive, L);
                } else {
                    rep.defect_on_zero = std::max(rep.defect_on_zero, -L);
                }
            }
    (void)nj;
    if (rep.n_interior == 0) rep.max_L_minus_1 = 0.0;
    if (rep.n_positive == 0) rep.min_L_on_positive = 1.0;
    rep.defect_on_zero = std::max(rep.defect_on_zero, 0.0);
    rep.overall = std::max({rep.max_L_minus_1, 1.0 - rep.min_L_on_positive,
                            rep.defect_on_zero, 0.0});
    return rep;
}

} // namespace wied
