#include "wied/reference.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>

#include "wied/errors.hpp"
#include "wied/linalg.hpp"
#include "wied/util.hpp"

namespace wied {

namespace {

double sq(double x) { return x * x; }

// exact minimizer of A x + B x^2/2 + s x_+^gamma for gamma > 1, B > 0.  The
// derivative s*gamma*x^{gamma-1} has infinite slope at 0, so Newton from
// either side misbehaves; bisection on [0, -A/B] is safe and cheap.
double scalar_root(double A, double B, double s, double gamma, double gtol) {
    if (A >= 0.0) return -A / B;  // stationary point is nonpositive, f inert there
    double lo = 0.0, hi = -A / B;
    for (int it = 0; it < 200 && hi - lo > 1e-18 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double gm = A + B * mid + s * gamma * std::pow(mid, gamma - 1.0);
        if (std::abs(gm) <= gtol) return mid;
        (gm < 0.0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

// edge-form spatial stiffness on one slice: out = (transverse trapezoid
// weighted) mirrored -Laplacian times the nodal mass.  Kept separate from the
// space-time assembly on purpose: the oracle must not share its bugs.
void slice_stiffness(const SpaceTimeGrid& g, const double* w, double* out) {
    const int ni = g.nx[0];
    const int nj = g.dim == 2 ? g.nx[1] : 0;
    const int ldj = nj + 1;
    const std::size_t sn = g.spatial_nodes();
    std::fill(out, out + sn, 0.0);
    auto s = [&](int i, int j) { return static_cast<std::size_t>(i) * ldj + j; };
    for (int i = 0; i < ni; ++i)
        for (int j = 0; j <= nj; ++j) {
            const double ty = g.dim == 2 ? g.mass_x1(j) : 1.0;
            const double gg = (w[s(i + 1, j)] - w[s(i, j)]) / g.h[0] * ty;
            out[s(i + 1, j)] += gg;
            out[s(i, j)] -= gg;
        }
    if (g.dim == 2)
        for (int j = 0; j < nj; ++j)
            for (int i = 0; i <= ni; ++i) {
                const double tx = g.mass_x0(i);
                const double gg = (w[s(i, j + 1)] - w[s(i, j)]) / g.h[1] * tx;
                out[s(i, j + 1)] += gg;
                out[s(i, j)] -= gg;
            }
}

struct StepSolver {
    const SpaceTimeGrid& g;
    const ProblemSpec& spec;
    const SolverConfig& cfg;
    bool f_on;
    std::size_t sn;
    double idt;
    double max_u0 = 0.0;
    double f_scale = 0.0;
    std::vector<double> mass, pinval;
    std::vector<unsigned char> pin;
    std::vector<double> lap, gvec, diag0, diag, b, delta;
    std::vector<unsigned char> mask;
    std::vector<double> dl, dd, du;

    StepSolver(const SpaceTimeGrid& gr, const ProblemSpec& sp, const SolverConfig& c,
               bool fon, const std::vector<double>& u0)
        : g(gr), spec(sp), cfg(c), f_on(fon), sn(gr.spatial_nodes()), idt(1.0 / gr.dt) {
        mass.resize(sn);
        pin.assign(sn, 0);
        pinval.assign(sn, 0.0);
        const int nj = g.dim == 2 ? g.nx[1] : 0;
        std::size_t n = 0;
        for (int i = 0; i <= g.nx[0]; ++i)
            for (int j = 0; j <= nj; ++j, ++n) {
                mass[n] = g.mass(i, j);
                if (spec.bc == BC::Dirichlet && g.on_spatial_boundary(i, j)) {
                    pin[n] = 1;
                    pinval[n] = u0[n];
                }
            }
        for (double x : u0) max_u0 = std::max(max_u0, x);
        f_scale = f_on ? f_gamma(max_u0, spec.gamma) : 0.0;
        lap.resize(sn);
        gvec.resize(sn);
        diag0.resize(sn);
        diag.resize(sn);
        b.resize(sn);
        delta.resize(sn);
        mask.resize(sn);
        // linear part of the step diagonal: M/dt + stiffness diagonal
        n = 0;
        for (int i = 0; i <= g.nx[0]; ++i)
            for (int j = 0; j <= nj; ++j, ++n) {
                const double degx = (i > 0 && i < g.nx[0]) ? 2.0 : 1.0;
                double lt = degx / g.h[0] * (g.dim == 2 ? g.mass_x1(j) : 1.0);
                if (g.dim == 2) {
                    const double degy = (j > 0 && j < g.nx[1]) ? 2.0 : 1.0;
                    lt += degy / g.h[1] * g.mass_x0(i);
                }
                diag0[n] = mass[n] * idt + lt;
            }
        if (g.dim == 1) {
            dl.resize(sn);
            dd.resize(sn);
            du.resize(sn);
        }
    }

    // gradient of the step functional at w, f picked with f(0)=0
    void gradient(const std::vector<double>& w, const std::vector<double>& uprev) {
        slice_stiffness(g, w.data(), lap.data());
        for (std::size_t n = 0; n < sn; ++n) {
            double f = f_on ? f_gamma(w[n], spec.gamma) : 0.0;
            gvec[n] = mass[n] * (w[n] - uprev[n]) * idt + lap[n] + mass[n] * f;
        }
    }

    double residual(const std::vector<double>& w, const std::vector<double>& uprev) {
        gradient(w, uprev);
        double res = 0.0;
        for (std::size_t n = 0; n < sn; ++n) {
            if (pin[n]) continue;
            const double rsc = gvec[n] / mass[n];
            double phi;
            if (f_on && spec.gamma == 1.0 && w[n] <= 0.0)
                phi = std::max(-rsc - 1.0, 0.0);
            else
                phi = std::abs(rsc);
            if (f_on) phi = std::max(phi, std::max(0.0, -w[n]) / (1.0 + max_u0));
            res = std::max(res, phi);
        }
        return res;
    }

    // solve (M/dt + stiffness + M fp) delta = b on rows with mask==0
    int linear_solve(const std::vector<double>& fp) {
        const int nj = g.dim == 2 ? g.nx[1] : 0;
        std::size_t n = 0;
        for (int i = 0; i <= g.nx[0]; ++i)
            for (int j = 0; j <= nj; ++j, ++n)
                diag[n] = mask[n] ? 1.0 : diag0[n] + mass[n] * fp[n];
        if (g.dim == 1) {
            for (std::size_t r = 0; r < sn; ++r) {
                dd[r] = mask[r] ? 1.0 : diag[r];
                dl[r] = (r > 0 && !mask[r] && !mask[r - 1]) ? -1.0 / g.h[0] : 0.0;
                du[r] = (r + 1 < sn && !mask[r] && !mask[r + 1]) ? -1.0 / g.h[0] : 0.0;
                delta[r] = mask[r] ? 0.0 : b[r];
            }
            thomas_solve(dl, dd, du, delta);
            return 1;
        }
        std::fill(delta.begin(), delta.end(), 0.0);
        std::vector<double> bm(sn);
        for (std::size_t r = 0; r < sn; ++r) bm[r] = mask[r] ? 0.0 : b[r];
        const PcgResult lin = pcg(
            [&](const double* in, double* out) {
                slice_stiffness(g, in, out);
                for (std::size_t r = 0; r < sn; ++r) {
                    out[r] += mass[r] * idt * in[r] + mass[r] * fp[r] * in[r];
                    if (mask[r]) out[r] = 0.0;
                }
            },
            diag, mask, bm, delta, cfg.linear_tol, cfg.linear_maxit);
        return lin.iters;
    }

    // one lexicographic pass of exact coordinate minimization of the step
    // functional; never increases it, so it cannot undo Newton's progress
    void gauss_seidel(std::vector<double>& w, const std::vector<double>& uprev,
                      double tol) {
        const int nj = g.dim == 2 ? g.nx[1] : 0;
        const int ldj = nj + 1;
        std::size_t n = 0;
        for (int i = 0; i <= g.nx[0]; ++i)
            for (int j = 0; j <= nj; ++j, ++n) {
                if (pin[n]) continue;
                const double ty = (g.dim == 2 ? g.mass_x1(j) : 1.0) / g.h[0];
                double sp = 0.0, ld = 0.0;
                if (i > 0) {
                    sp -= w[n - ldj] * ty;
                    ld += ty;
                }
                if (i < g.nx[0]) {
                    sp -= w[n + ldj] * ty;
                    ld += ty;
                }
                if (g.dim == 2) {
                    const double tx = g.mass_x0(i) / g.h[1];
                    if (j > 0) {
                        sp -= w[n - 1] * tx;
                        ld += tx;
                    }
                    if (j < nj) {
                        sp -= w[n + 1] * tx;
                        ld += tx;
                    }
                }
                const double B = mass[n] * idt + ld;
                const double A = sp - mass[n] * idt * uprev[n];
                w[n] = scalar_root(A, B, mass[n], spec.gamma, 0.01 * tol * mass[n]);
            }
    }

    // advance one implicit Euler step; returns iterations, fills res_out
    int advance(std::vector<double>& w, const std::vector<double>& uprev, int step,
                double& res_out) {
        for (std::size_t n = 0; n < sn; ++n) w[n] = pin[n] ? pinval[n] : uprev[n];
        double r0 = residual(w, uprev);
        const double scale = std::max(r0, f_scale);
        if (scale == 0.0) {
            res_out = 0.0;
            return 0;
        }
        const double tol = cfg.tol_grad * scale;
        std::vector<double> fp(sn, 0.0), w_try(sn);
        int iters = 0;
        double res = r0;
        while (res > tol) {
            if (iters >= cfg.max_newton) {
                SolveReport rep;
                rep.converged = false;
                rep.iterations = iters;
                rep.initial_residual = r0;
                rep.final_residual = res;
                rep.max_u0 = max_u0;
                throw nonconvergence_error("parabolic step " + std::to_string(step) +
                                               ": residual " + std::to_string(res) +
                                               " above " + std::to_string(tol),
                                           rep);
            }
            if (f_on && spec.gamma == 1.0) {
                // active set pass on the step QP
                slice_stiffness(g, w.data(), lap.data());
                for (std::size_t n = 0; n < sn; ++n)
                    gvec[n] = mass[n] * (w[n] - uprev[n]) * idt + lap[n] + mass[n];
                for (std::size_t n = 0; n < sn; ++n) {
                    mask[n] = pin[n];
                    if (!pin[n] && w[n] - gvec[n] / diag0[n] < 0.0) {
                        mask[n] = 1;
                        w[n] = 0.0;
                    }
                }
                slice_stiffness(g, w.data(), lap.data());
                for (std::size_t n = 0; n < sn; ++n)
                    b[n] = -(mass[n] * (w[n] - uprev[n]) * idt + lap[n] + mass[n]);
                linear_solve(fp);
                for (std::size_t n = 0; n < sn; ++n) w[n] += delta[n];
            } else {
                for (std::size_t n = 0; n < sn; ++n) mask[n] = pin[n];
                gradient(w, uprev);
                for (std::size_t n = 0; n < sn; ++n) b[n] = -gvec[n];
                if (f_on)
                    for (std::size_t n = 0; n < sn; ++n)
                        fp[n] = f_gamma_smoothed_prime(w[n], spec.gamma, 0.0);
                linear_solve(fp);
                // residual backtracking guard
                double step_len = 1.0;
                for (int bt = 0; bt < 12; ++bt) {
                    for (std::size_t n = 0; n < sn; ++n)
                        w_try[n] = w[n] + step_len * delta[n];
                    if (residual(w_try, uprev) <= std::max(10.0 * res, tol)) break;
                    step_len *= 0.5;
                }
                for (std::size_t n = 0; n < sn; ++n) w[n] += step_len * delta[n];
                // clamped-slope Newton overshoots where the true values sit
                // below the derivative clamp; one exact row sweep repairs that
                if (f_on && spec.gamma > 1.0) gauss_seidel(w, uprev, tol);
            }
            ++iters;
            res = residual(w, uprev);
        }
        res_out = res;
        return iters;
    }
};

} // namespace

ParabolicRun solve_parabolic(const ProblemSpec& spec, GridPtr grid,
                             const SolverConfig& config, bool f_enabled) {
    validate_spec(spec);
    validate_config(config);
    if (grid->dim != spec.dim)
        throw parameter_error("solve_parabolic: grid dimension does not match the problem");

    const std::vector<double> u0 = sample_initial(spec.initial, *grid, spec.gamma);
    StepSolver st(*grid, spec, config, f_enabled, u0);
    const std::size_t sn = grid->spatial_nodes();

    ParabolicRun run;
    run.u = ScalarField(grid);
    std::copy(u0.begin(), u0.end(), run.u.v.begin());

    std::vector<double> uprev = u0, w(sn);
    for (int m = 1; m <= grid->nt; ++m) {
        double res = 0.0;
        const int iters = st.advance(w, uprev, m, res);
        std::copy(w.begin(), w.end(), run.u.v.begin() + static_cast<std::size_t>(m) * sn);
        run.steps.push_back({m, iters, res});
        uprev = w;
    }
    check_finite(run.u, "solve_parabolic");
    return run;
}

void write_step_csv(const std::vector<ParabolicStep>& steps, const std::string& path) {
    std::FILE* f = std::fopen(path.c_str(), "w");
    if (!f) throw data_error("write_step_csv: cannot open " + path);
    std::fprintf(f, "step,newton_iters,residual\n");
    for (const ParabolicStep& s : steps)
        std::fprintf(f, "%d,%d,%.17g\n", s.step, s.newton_iters, s.residual);
    std::fclose(f);
}

std::vector<ScalarField> build_test_bank(GridPtr grid) {
    const SpaceTimeGrid& g = *grid;
    const double fr[4][2] = {{0.35, 0.35}, {0.65, 0.35}, {0.35, 0.65}, {0.65, 0.65}};
    const double widths[3] = {1.0, 0.65, 0.4};

    std::vector<ScalarField> bank;
    const int nj = g.dim == 2 ? g.nx[1] : 0;
    for (const auto& c : fr)
        for (double s : widths) {
            ScalarField eta(grid);
            double cx0 = g.a[0] + c[0] * (g.b[0] - g.a[0]);
            double cx1 = g.dim == 2 ? g.a[1] + (1.0 - c[0]) * (g.b[1] - g.a[1]) : 0.0;
            double ct = c[1] * g.T;
            const double mx0 = std::min(cx0 - g.a[0], g.b[0] - cx0);
            const double mx1 =
                g.dim == 2 ? std::min(cx1 - g.a[1], g.b[1] - cx1) : 1.0;
            const double mt = std::min(ct, g.T - ct);
            const double rx0 = 0.95 * s * mx0;
            const double rx1 = 0.95 * s * mx1;
            const double rt = 0.95 * s * mt;
            for (int k = 0; k <= g.nt; ++k)
                for (int i = 0; i <= g.nx[0]; ++i)
                    for (int j = 0; j <= nj; ++j) {
                        double d2 = sq((g.x0(i) - cx0) / rx0) + sq((g.time(k) - ct) / rt);
                        if (g.dim == 2) d2 += sq((g.x1(j) - cx1) / rx1);
                        const double q = 1.0 - d2;
                        eta.at(k, i, j) = q > 0.0 ? q * q : 0.0;
                    }
            bank.push_back(std::move(eta));
        }
    return bank;
}

double strong_residual(const ScalarField& field, const ProblemSpec& spec,
                       const std::vector<ScalarField>& bank) {
    check_finite(field, "strong_residual");
    const SpaceTimeGrid& g = *field.grid;
    const int nj = g.dim == 2 ? g.nx[1] : 0;
    const std::size_t sn = g.spatial_nodes();

    double worst = 0.0;
    std::vector<double> su(sn), se(sn);
    for (const ScalarField& eta : bank) {
        if (eta.grid->node_count() != g.node_count())
            throw domain_error("strong_residual: test function on a different grid");
        Accum acc;
        // time derivative, midpoint in time
        for (int k = 0; k < g.nt; ++k)
            for (int i = 0; i <= g.nx[0]; ++i)
                for (int j = 0; j <= nj; ++j) {
                    const double du = field.at(k + 1, i, j) - field.at(k, i, j);
                    const double em = 0.5 * (eta.at(k + 1, i, j) + eta.at(k, i, j));
                    acc.add(g.mass(i, j) * du * em);
                }
        // gradient and reaction terms, trapezoid in time
        for (int k = 0; k <= g.nt; ++k) {
            const double tw = (k == 0 || k == g.nt) ? 0.5 * g.dt : g.dt;
            const double* u = field.v.data() + static_cast<std::size_t>(k) * sn;
            const double* e = eta.v.data() + static_cast<std::size_t>(k) * sn;
            slice_stiffness(g, u, su.data());
            Accum dk;
            for (std::size_t n = 0; n < sn; ++n) dk.add(su[n] * e[n]);
            acc.add(tw * dk.value());
            Accum fk;
            std::size_t n = 0;
            for (int i = 0; i <= g.nx[0]; ++i)
                for (int j = 0; j <= nj; ++j, ++n)
                    fk.add(g.mass(i, j) * f_gamma(u[n], spec.gamma) * e[n]);
            acc.add(tw * fk.value());
        }
        worst = std::max(worst, std::abs(acc.value()));
    }
    return worst;
}

} // namespace wied
