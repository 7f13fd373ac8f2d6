#include "wied/energy.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "wied/util.hpp"

namespace wied {

FunctionalMode mode_weighted(const ProblemSpec& spec) {
    return {1.0 / spec.epsilon, spec.epsilon, 1.0};
}

FunctionalMode mode_scaled(const ProblemSpec& spec) {
    return {1.0, 1.0, spec.epsilon};
}

QuadratureWeights time_weights(const SpaceTimeGrid& g, double lambda) {
    QuadratureWeights q;
    q.w.resize(g.nt);
    const double cell = -std::expm1(-lambda * g.dt);  // 1 - e^{-l dt}, exact
    Accum sum;
    for (int k = 0; k < g.nt; ++k) {
        q.w[k] = std::exp(-lambda * g.time(k)) * cell;
        if (q.w[k] == 0.0 && q.first_underflow < 0) q.first_underflow = k;
        sum.add(q.w[k]);
    }
    q.sum = sum.value();
    return q;
}

namespace {

// slice integrals: S = sum over edges of (du)^2/h with transverse trapezoid
// weights, P = 2 * sum of mass * (u_+)^gamma
void slice_terms(const SpaceTimeGrid& g, const double* u, double gamma, double sigma,
                 double& S, double& P) {
    Accum s, p;
    if (g.dim == 1) {
        for (int i = 0; i < g.nx[0]; ++i) {
            const double d = u[i + 1] - u[i];
            s.add(d * d / g.h[0]);
        }
        for (int i = 0; i <= g.nx[0]; ++i)
            p.add(2.0 * g.mass_x0(i) * potential_smoothed(u[i], gamma, sigma));
    } else {
        const int sj = g.nx[1] + 1;
        for (int j = 0; j <= g.nx[1]; ++j) {
            const double my = g.mass_x1(j);
            for (int i = 0; i < g.nx[0]; ++i) {
                const double d = u[(i + 1) * sj + j] - u[i * sj + j];
                s.add(my * d * d / g.h[0]);
            }
        }
        for (int i = 0; i <= g.nx[0]; ++i) {
            const double mx = g.mass_x0(i);
            for (int j = 0; j < g.nx[1]; ++j) {
                const double d = u[i * sj + j + 1] - u[i * sj + j];
                s.add(mx * d * d / g.h[1]);
            }
        }
        for (int i = 0; i <= g.nx[0]; ++i)
            for (int j = 0; j <= g.nx[1]; ++j)
                p.add(2.0 * g.mass(i, j) * potential_smoothed(u[i * sj + j], gamma, sigma));
    }
    S = s.value();
    P = p.value();
}

double midpoint_kinetic(const SpaceTimeGrid& g, const double* lo, const double* hi, double dt) {
    Accum k;
    const int nj = g.dim == 2 ? g.nx[1] : 0;
    std::size_t n = 0;
    for (int i = 0; i <= g.nx[0]; ++i)
        for (int j = 0; j <= nj; ++j, ++n) {
            const double d = (hi[n] - lo[n]) / dt;
            k.add(g.mass(i, j) * d * d);
        }
    return k.value();
}

} // namespace

EnergyBreakdown energy_mode(const ScalarField& f, const ProblemSpec& spec,
                            const FunctionalMode& mode, double sigma) {
    check_finite(f, "energy");
    const SpaceTimeGrid& g = *f.grid;
    const QuadratureWeights q = time_weights(g, mode.decay);
    const std::size_t sn = g.spatial_nodes();

    std::vector<double> S(g.nt + 1), P(g.nt + 1), K(g.nt);
    parallel_for(static_cast<std::size_t>(g.nt) + 1, [&](std::size_t lo, std::size_t hi) {
        for (std::size_t k = lo; k < hi; ++k) {
            slice_terms(g, f.v.data() + k * sn, spec.gamma, sigma, S[k], P[k]);
            if (static_cast<int>(k) < g.nt)
                K[k] = midpoint_kinetic(g, f.v.data() + k * sn, f.v.data() + (k + 1) * sn, g.dt);
        }
    });

    Accum kin, dir, pot;
    for (int k = 0; k < g.nt; ++k) {
        kin.add(q.w[k] * K[k]);
        dir.add(q.w[k] * 0.5 * (S[k] + S[k + 1]));
        pot.add(q.w[k] * 0.5 * (P[k] + P[k + 1]));
    }
    EnergyBreakdown e;
    e.kinetic = mode.kin * kin.value();
    e.dirichlet = mode.spat * dir.value();
    e.potential = mode.spat * pot.value();
    e.total = e.kinetic + e.dirichlet + e.potential;
    return e;
}

EnergyBreakdown weighted_energy(const ScalarField& f, const ProblemSpec& spec) {
    return energy_mode(f, spec, mode_weighted(spec), 0.0);
}

EnergyBreakdown scaled_energy(const ScalarField& f, const ProblemSpec& spec) {
    return energy_mode(f, spec, mode_scaled(spec), 0.0);
}

std::vector<unsigned char> pinned_mask(const SpaceTimeGrid& g, BC bc) {
    std::vector<unsigned char> m(g.node_count(), 0);
    const std::size_t sn = g.spatial_nodes();
    for (std::size_t n = 0; n < sn; ++n) m[n] = 1;  // trace at t=0
    if (bc == BC::Dirichlet) {
        const int nj = g.dim == 2 ? g.nx[1] : 0;
        for (int k = 1; k <= g.nt; ++k)
            for (int i = 0; i <= g.nx[0]; ++i)
                for (int j = 0; j <= nj; ++j)
                    if (g.on_spatial_boundary(i, j)) m[g.index(k, i, j)] = 1;
    }
    return m;
}

EllipticOperator make_operator(const ScalarField& u, const ProblemSpec& spec,
                               const FunctionalMode& mode, double sigma,
                               double weight_floor) {
    const SpaceTimeGrid& g = *u.grid;
    EllipticOperator op;
    op.grid = u.grid;
    op.coef_ratio = mode.kin / mode.spat;

    QuadratureWeights q = time_weights(g, mode.decay);
    if (weight_floor > 0.0 && !q.w.empty()) {
        const double floor_abs = weight_floor * q.w.front();
        for (double& w : q.w) w = std::max(w, floor_abs);
    }
    const double idt2 = 1.0 / (g.dt * g.dt);
    op.ctm.assign(g.nt + 1, 0.0);
    op.ctp.assign(g.nt + 1, 0.0);
    op.somega.assign(g.nt + 1, 0.0);
    for (int m = 0; m <= g.nt; ++m) {
        const double wm1 = m > 0 ? q.w[m - 1] : 0.0;
        const double wm = m < g.nt ? q.w[m] : 0.0;
        op.ctm[m] = 2.0 * mode.kin * wm1 * idt2;
        op.ctp[m] = 2.0 * mode.kin * wm * idt2;
        op.somega[m] = mode.spat * (wm1 + wm);
    }
    op.fp.resize(g.node_count());
    for (std::size_t n = 0; n < op.fp.size(); ++n)
        op.fp[n] = f_gamma_smoothed_prime(u.v[n], spec.gamma, sigma);
    op.pinned = pinned_mask(g, spec.bc);
    return op;
}

namespace {

// (Ltilde v)_i = mass-weighted mirrored -Laplacian of one slice
void spatial_rows_1d(const SpaceTimeGrid& g, const double* v, double* out) {
    const int n = g.nx[0];
    const double ih = 1.0 / g.h[0];
    out[0] = (v[0] - v[1]) * ih;
    for (int i = 1; i < n; ++i) out[i] = (2.0 * v[i] - v[i - 1] - v[i + 1]) * ih;
    out[n] = (v[n] - v[n - 1]) * ih;
}

void spatial_rows_2d(const SpaceTimeGrid& g, const double* v, double* out) {
    const int nx = g.nx[0], ny = g.nx[1];
    const int sj = ny + 1;
    const double ihx = 1.0 / g.h[0], ihy = 1.0 / g.h[1];
    for (int i = 0; i <= nx; ++i) {
        const double mx = g.mass_x0(i);
        for (int j = 0; j <= ny; ++j) {
            const double my = g.mass_x1(j);
            const double c = v[i * sj + j];
            double acc = 0.0;
            if (i > 0) acc += my * (c - v[(i - 1) * sj + j]) * ihx;
            if (i < nx) acc += my * (c - v[(i + 1) * sj + j]) * ihx;
            if (j > 0) acc += mx * (c - v[i * sj + j - 1]) * ihy;
            if (j < ny) acc += mx * (c - v[i * sj + j + 1]) * ihy;
            out[i * sj + j] = acc;
        }
    }
}

} // namespace

void EllipticOperator::apply_full(const double* in, double* out) const {
    const SpaceTimeGrid& g = *grid;
    const std::size_t sn = g.spatial_nodes();
    parallel_for(static_cast<std::size_t>(g.nt) + 1, [&](std::size_t klo, std::size_t khi) {
        std::vector<double> sp(sn);
        for (std::size_t m = klo; m < khi; ++m) {
            const double* um = in + m * sn;
            double* om = out + m * sn;
            if (g.dim == 1)
                spatial_rows_1d(g, um, sp.data());
            else
                spatial_rows_2d(g, um, sp.data());
            const double* umm = m > 0 ? in + (m - 1) * sn : nullptr;
            const double* ump = static_cast<int>(m) < g.nt ? in + (m + 1) * sn : nullptr;
            const int nj = g.dim == 2 ? g.nx[1] : 0;
            std::size_t n = 0;
            for (int i = 0; i <= g.nx[0]; ++i)
                for (int j = 0; j <= nj; ++j, ++n) {
                    double t = 0.0;
                    if (umm) t += ctm[m] * (um[n] - umm[n]);
                    if (ump) t -= ctp[m] * (ump[n] - um[n]);
                    om[n] = g.mass(i, j) * t + somega[m] * sp[n];
                }
        }
    });
}

void EllipticOperator::apply(const double* in, double* out) const {
    apply_masked(in, out, pinned.data());
}

void EllipticOperator::apply_masked(const double* in, double* out,
                                    const unsigned char* mask) const {
    const SpaceTimeGrid& g = *grid;
    apply_full(in, out);
    const int nj = g.dim == 2 ? g.nx[1] : 0;
    std::size_t n = 0;
    for (int m = 0; m <= g.nt; ++m)
        for (int i = 0; i <= g.nx[0]; ++i)
            for (int j = 0; j <= nj; ++j, ++n) {
                if (mask[n]) {
                    out[n] = 0.0;
                    continue;
                }
                out[n] += somega[m] * g.mass(i, j) * fp[n] * in[n];
            }
}

void EllipticOperator::diagonal(double* out) const {
    const SpaceTimeGrid& g = *grid;
    const int nj = g.dim == 2 ? g.nx[1] : 0;
    std::size_t n = 0;
    for (int m = 0; m <= g.nt; ++m)
        for (int i = 0; i <= g.nx[0]; ++i)
            for (int j = 0; j <= nj; ++j, ++n) {
                if (pinned[n]) {
                    out[n] = 1.0;
                    continue;
                }
                double lt = 0.0;
                const double degx = ((i > 0) + (i < g.nx[0])) / g.h[0];
                if (g.dim == 1) {
                    lt = degx;
                } else {
                    const double degy = ((j > 0) + (j < g.nx[1])) / g.h[1];
                    lt = g.mass_x1(j) * degx + g.mass_x0(i) * degy;
                }
                out[n] = g.mass(i, j) * (ctm[m] + ctp[m] + somega[m] * fp[n]) + somega[m] * lt;
            }
}

ScalarField energy_gradient_mode(const ScalarField& u, const ProblemSpec& spec,
                                 const FunctionalMode& mode, double sigma,
                                 double weight_floor) {
    check_finite(u, "energy_gradient");
    const SpaceTimeGrid& g = *u.grid;
    EllipticOperator op = make_operator(u, spec, mode, sigma, weight_floor);
    ScalarField grad(u.grid);
    op.apply_full(u.v.data(), grad.v.data());
    const int nj = g.dim == 2 ? g.nx[1] : 0;
    std::size_t n = 0;
    for (int m = 0; m <= g.nt; ++m)
        for (int i = 0; i <= g.nx[0]; ++i)
            for (int j = 0; j <= nj; ++j, ++n) {
                if (op.pinned[n]) {
                    grad.v[n] = 0.0;
                    continue;
                }
                grad.v[n] += op.somega[m] * g.mass(i, j) *
                             f_gamma_smoothed(u.v[n], spec.gamma, sigma);
            }
    return grad;
}

ScalarField energy_gradient(const ScalarField& u, const ProblemSpec& spec) {
    return energy_gradient_mode(u, spec, mode_weighted(spec), spec.smoothing_sigma);
}

ScalarField apply_linearized(const ScalarField& field, const ProblemSpec& spec,
                             const ScalarField& direction) {
    check_finite(field, "apply_linearized");
    check_finite(direction, "apply_linearized");
    EllipticOperator op =
        make_operator(field, spec, mode_weighted(spec), spec.smoothing_sigma);
    std::vector<double> d = direction.v;
    for (std::size_t n = 0; n < d.size(); ++n)
        if (op.pinned[n]) d[n] = 0.0;
    ScalarField out(field.grid);
    op.apply(d.data(), out.v.data());
    return out;
}

GridPtr scaled_grid(const ProblemSpec& spec, const SpaceTimeGrid& ugrid) {
    return make_grid(ugrid.dim, {{{ugrid.a[0], ugrid.b[0]}, {ugrid.a[1], ugrid.b[1]}}},
                     ugrid.nx, ugrid.T / spec.epsilon, ugrid.nt);
}

ScalarField reindex_to_scaled(const ScalarField& u, const ProblemSpec& spec) {
    ScalarField v(scaled_grid(spec, *u.grid));
    v.v = u.v;
    return v;
}

ScalarField reindex_to_unscaled(const ScalarField& v, const ProblemSpec& spec) {
    const SpaceTimeGrid& gv = *v.grid;
    ScalarField u(make_grid(gv.dim, {{{gv.a[0], gv.b[0]}, {gv.a[1], gv.b[1]}}}, gv.nx,
                            gv.T * spec.epsilon, gv.nt));
    u.v = v.v;
    return u;
}

EnergyTrace energy_trace(const ScalarField& u, const ProblemSpec& spec) {
    check_finite(u, "energy_trace");
    const SpaceTimeGrid& g = *u.grid;
    const std::size_t sn = g.spatial_nodes();
    const double dtau = g.dt / spec.epsilon;

    EnergyTrace tr;
    tr.dtau = dtau;
    tr.t.resize(g.nt + 1);
    tr.I.resize(g.nt + 1);
    tr.R.resize(g.nt + 1);
    tr.E.assign(g.nt + 1, 0.0);
    tr.I_mid.resize(g.nt);

    std::vector<double> S(g.nt + 1), P(g.nt + 1);
    parallel_for(static_cast<std::size_t>(g.nt) + 1, [&](std::size_t lo, std::size_t hi) {
        for (std::size_t k = lo; k < hi; ++k) {
            slice_terms(g, u.v.data() + k * sn, spec.gamma, 0.0, S[k], P[k]);
            if (static_cast<int>(k) < g.nt)
                tr.I_mid[k] =
                    midpoint_kinetic(g, u.v.data() + k * sn, u.v.data() + (k + 1) * sn, dtau);
        }
    });

    for (int k = 0; k <= g.nt; ++k) {
        tr.t[k] = g.time(k) / spec.epsilon;
        tr.R[k] = spec.epsilon * (S[k] + P[k]);
        // slice sample is the backward difference quotient into t_k
        if (k == 0)
            tr.I[k] = tr.I_mid.empty() ? 0.0 : tr.I_mid[0];
        else
            tr.I[k] = tr.I_mid[k - 1];
    }

    const double beta = -std::expm1(-dtau);  // 1 - e^{-dtau}
    const double decay = std::exp(-dtau);
    for (int k = g.nt - 1; k >= 0; --k) {
        const double rbar = 0.5 * (tr.R[k] + tr.R[k + 1]);
        tr.E[k] = beta * (tr.I_mid[k] + rbar) + decay * tr.E[k + 1];
    }
    tr.dropped_tail = std::exp(-g.T / spec.epsilon) * tr.R[g.nt];
    return tr;
}

void write_trace_csv(const EnergyTrace& tr, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw format_error("write_trace_csv: cannot open " + path);
    out << "t,I,R,E\n";
    char buf[160];
    for (std::size_t k = 0; k < tr.t.size(); ++k) {
        std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g,%.17g\n", tr.t[k], tr.I[k],
                      tr.R[k], tr.E[k]);
        out << buf;
    }
}

} // namespace wied
