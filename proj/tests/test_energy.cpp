#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>

#include "wied/energy.hpp"
#include "wied/grid.hpp"
#include "wied/model.hpp"

using namespace wied;

namespace {

ProblemSpec basic_spec(double gamma, double eps, int dim = 1) {
    ProblemSpec s;
    s.gamma = gamma;
    s.epsilon = eps;
    s.dim = dim;
    return s;
}

// direct summation of the quadrature formula: exact cell weights in time,
// midpoint kinetic, slice-trapezoid gradient/potential
double direct_energy_1d(const ScalarField& u, double gamma, double eps) {
    const SpaceTimeGrid& g = *u.grid;
    double total = 0.0;
    for (int m = 0; m < g.nt; ++m) {
        const double w = std::exp(-g.time(m) / eps) - std::exp(-g.time(m + 1) / eps);
        double kin = 0.0;
        for (int i = 0; i <= g.nx[0]; ++i) {
            const double du = (u.at(m + 1, i) - u.at(m, i)) / g.dt;
            kin += g.mass(i) * du * du;
        }
        double sp = 0.0;  // slice-average of |u_x|^2 + 2 u_+^gamma
        for (int k = m; k <= m + 1; ++k) {
            double s = 0.0, p = 0.0;
            for (int i = 0; i < g.nx[0]; ++i) {
                const double dx = u.at(k, i + 1) - u.at(k, i);
                s += dx * dx / g.h[0];
            }
            for (int i = 0; i <= g.nx[0]; ++i) p += g.mass(i) * potential(u.at(k, i), gamma);
            sp += 0.5 * (s + 2.0 * p);
        }
        total += w * (eps * kin + sp);
    }
    return total;
}

ScalarField random_field(GridPtr g, double lo, double hi, unsigned seed) {
    ScalarField f(g);
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> u(lo, hi);
    for (auto& x : f.v) x = u(rng);
    return f;
}

} // namespace

TEST_CASE("zero field has zero energy") {
    auto g = make_grid_1d(-1.0, 1.0, 6, 1.0, 4);
    ScalarField f(g);
    for (double gamma : {1.0, 1.5}) {
        auto e = weighted_energy(f, basic_spec(gamma, 0.1));
        CHECK(e.total == 0.0);
        CHECK(e.kinetic == 0.0);
        CHECK(e.dirichlet == 0.0);
        CHECK(e.potential == 0.0);
    }
}

TEST_CASE("time-constant field factorizes the weights") {
    auto g = make_grid_1d(-1.0, 1.0, 16, 0.8, 12);
    const ProblemSpec spec = basic_spec(1.5, 0.1);
    ScalarField f(g);
    for (int k = 0; k <= g->nt; ++k)
        for (int i = 0; i <= g->nx[0]; ++i) {
            const double x = g->x0(i);
            f.at(k, i) = 0.3 * (1.0 - x * x);  // fixed smooth slice
        }
    // one-slice sums by hand
    double s = 0.0, p = 0.0;
    for (int i = 0; i < g->nx[0]; ++i) {
        const double dx = f.at(0, i + 1) - f.at(0, i);
        s += dx * dx / g->h[0];
    }
    for (int i = 0; i <= g->nx[0]; ++i) p += g->mass(i) * potential(f.at(0, i), spec.gamma);
    const double wsum = 1.0 - std::exp(-g->T / spec.epsilon);
    auto e = weighted_energy(f, spec);
    CHECK(e.kinetic == 0.0);
    CHECK(e.total == doctest::Approx((s + 2.0 * p) * wsum).epsilon(1e-13));
    CHECK(e.dirichlet == doctest::Approx(s * wsum).epsilon(1e-13));
    CHECK(e.potential == doctest::Approx(2.0 * p * wsum).epsilon(1e-13));
}

TEST_CASE("tiny grid matches direct summation") {
    auto g = make_grid_1d(-1.0, 1.0, 2, 0.4, 2);
    ScalarField f(g);
    f.at(0, 0) = 0.3;
    f.at(0, 1) = -0.2;
    f.at(0, 2) = 0.7;
    f.at(1, 0) = 0.0;
    f.at(1, 1) = 0.5;
    f.at(1, 2) = 0.1;
    f.at(2, 0) = 0.2;
    f.at(2, 1) = 0.4;
    f.at(2, 2) = -0.3;
    for (double gamma : {1.0, 1.5, 1.8}) {
        const ProblemSpec spec = basic_spec(gamma, 0.25);
        auto e = weighted_energy(f, spec);
        CHECK(e.total == doctest::Approx(direct_energy_1d(f, gamma, 0.25)).epsilon(1e-14));
        CHECK(e.total == doctest::Approx(e.kinetic + e.dirichlet + e.potential).epsilon(1e-14));
    }
}

TEST_CASE("random fields match direct summation") {
    auto g = make_grid_1d(-0.5, 1.5, 5, 0.9, 4);
    for (unsigned seed : {1u, 2u, 3u}) {
        auto f = random_field(g, -1.0, 1.5, seed);
        auto e = weighted_energy(f, basic_spec(1.5, 0.2));
        CHECK(e.total == doctest::Approx(direct_energy_1d(f, 1.5, 0.2)).epsilon(1e-13));
    }
}

TEST_CASE("components are nonnegative on random input") {
    auto g = make_grid(2, {{{-1.0, 1.0}, {0.0, 1.0}}}, {4, 3}, 0.7, 3);
    for (unsigned seed = 0; seed < 8; ++seed) {
        auto f = random_field(g, -2.0, 2.0, seed);
        auto e = weighted_energy(f, basic_spec(1.3, 0.15, 2));
        CHECK(e.kinetic >= 0.0);
        CHECK(e.dirichlet >= 0.0);
        CHECK(e.potential >= 0.0);
        CHECK(e.total == doctest::Approx(e.kinetic + e.dirichlet + e.potential).epsilon(1e-12));
    }
}

TEST_CASE("cell weights sum to the full mass") {
    for (double eps : {1.0, 0.1, 0.02}) {
        auto g = make_grid_1d(-1.0, 1.0, 2, 1.0, 64);
        auto q = time_weights(*g, 1.0 / eps);
        double sum = 0.0;
        for (double w : q.w) {
            CHECK(w >= 0.0);
            sum += w;
        }
        CHECK(sum == doctest::Approx(1.0 - std::exp(-1.0 / eps)).epsilon(1e-14));
    }
}

TEST_CASE("deep horizon weights underflow and are flagged") {
    auto g = make_grid_1d(-1.0, 1.0, 2, 1.0, 4);
    auto q = time_weights(*g, 4000.0);  // cells at e^{-1000} scale
    CHECK(q.first_underflow >= 0);
    CHECK(q.w[0] > 0.0);
}

TEST_CASE("gradient matches central differences, gamma=1.5") {
    auto g = make_grid_1d(-1.0, 1.0, 6, 0.5, 4);
    const ProblemSpec spec = basic_spec(1.5, 0.2);
    auto u = random_field(g, 0.5, 1.5, 17);  // strictly positive: smooth regime
    ScalarField G = energy_gradient(u, spec);
    auto pinned = pinned_mask(*g, spec.bc);

    std::mt19937 rng(23);
    std::uniform_real_distribution<double> dir(-1.0, 1.0);
    const double h = 1e-5;
    for (int trial = 0; trial < 20; ++trial) {
        ScalarField eta(g);
        for (std::size_t n = 0; n < eta.v.size(); ++n)
            eta.v[n] = pinned[n] ? 0.0 : dir(rng);
        double gdot = 0.0;
        for (std::size_t n = 0; n < eta.v.size(); ++n) gdot += G.v[n] * eta.v[n];
        ScalarField up(g), dn(g);
        for (std::size_t n = 0; n < eta.v.size(); ++n) {
            up.v[n] = u.v[n] + h * eta.v[n];
            dn.v[n] = u.v[n] - h * eta.v[n];
        }
        const double fd =
            (weighted_energy(up, spec).total - weighted_energy(dn, spec).total) / (2 * h);
        CHECK(std::abs(fd - gdot) <= 1e-6 * std::max(1.0, std::abs(gdot)));
    }
}

TEST_CASE("linearized operator is symmetric and positive") {
    auto g = make_grid_1d(-1.0, 1.0, 5, 0.5, 3);
    const ProblemSpec spec = basic_spec(1.5, 0.2);
    auto state = random_field(g, 0.4, 1.2, 31);
    auto pinned = pinned_mask(*g, spec.bc);
    std::mt19937 rng(37);
    std::uniform_real_distribution<double> dir(-1.0, 1.0);

    auto rand_dir = [&]() {
        ScalarField d(g);
        for (std::size_t n = 0; n < d.v.size(); ++n) d.v[n] = pinned[n] ? 0.0 : dir(rng);
        return d;
    };
    auto dot = [](const ScalarField& a, const ScalarField& b) {
        double s = 0.0;
        for (std::size_t n = 0; n < a.v.size(); ++n) s += a.v[n] * b.v[n];
        return s;
    };
    auto norm = [&](const ScalarField& a) { return std::sqrt(dot(a, a)); };

    for (int trial = 0; trial < 20; ++trial) {
        auto v = rand_dir(), w = rand_dir();
        auto Av = apply_linearized(state, spec, v);
        auto Aw = apply_linearized(state, spec, w);
        CHECK(std::abs(dot(Av, w) - dot(Aw, v)) <= 1e-12 * norm(v) * norm(w));
    }
    for (int trial = 0; trial < 100; ++trial) {
        auto v = rand_dir();
        auto Av = apply_linearized(state, spec, v);
        CHECK(dot(Av, v) >= -1e-12 * dot(v, v));
    }
}

TEST_CASE("pinned rows by boundary kind") {
    auto g = make_grid_1d(-1.0, 1.0, 4, 1.0, 3);
    auto pd = pinned_mask(*g, BC::Dirichlet);
    auto pn = pinned_mask(*g, BC::Neumann);
    std::size_t nd = 0, nn = 0;
    for (auto x : pd) nd += x;
    for (auto x : pn) nn += x;
    CHECK(nn == g->spatial_nodes());            // t=0 slice only
    CHECK(nd == g->spatial_nodes() + 2 * 3);    // plus two lateral nodes per later slice
    CHECK(pd[g->index(2, 0)] == 1);
    CHECK(pd[g->index(2, 2)] == 0);
    CHECK(pn[g->index(2, 0)] == 0);
}

TEST_CASE("scaling identity relates the two functionals") {
    for (double eps : {0.25, 0.1, 0.05}) {
        auto g = make_grid_1d(-1.0, 1.0, 8, 1.0, 24);
        const ProblemSpec spec = basic_spec(1.5, eps);
        auto u = random_field(g, -0.5, 1.0, 7u + static_cast<unsigned>(1000 * eps));
        auto v = reindex_to_scaled(u, spec);
        const double Eu = weighted_energy(u, spec).total;
        const double Jv = scaled_energy(v, spec).total;
        CHECK(std::abs(eps * Eu - Jv) <= 1e-10 * (1.0 + Jv));

        auto back = reindex_to_unscaled(v, spec);
        for (std::size_t n = 0; n < u.v.size(); ++n) CHECK(back.v[n] == u.v[n]);
    }
}

TEST_CASE("trace starts at the scaled energy and ends at zero") {
    auto g = make_grid_1d(-1.0, 1.0, 8, 1.0, 32);
    const ProblemSpec spec = basic_spec(1.0, 0.1);
    auto u = random_field(g, 0.0, 0.8, 3);
    auto tr = energy_trace(u, spec);
    REQUIRE(tr.E.size() == static_cast<std::size_t>(g->nt) + 1);
    const double J = scaled_energy(reindex_to_scaled(u, spec), spec).total;
    CHECK(tr.E[0] == doctest::Approx(J).epsilon(1e-12));
    CHECK(tr.E[g->nt] == 0.0);
    CHECK(tr.dtau == doctest::Approx(g->dt / spec.epsilon).epsilon(1e-15));
    for (int k = 0; k <= g->nt; ++k) {
        CHECK(tr.I[k] >= 0.0);
        CHECK(tr.R[k] >= 0.0);
        CHECK(tr.t[k] == doctest::Approx(g->time(k) / spec.epsilon).epsilon(1e-14));
    }
}

TEST_CASE("trace of a time-constant field") {
    // deep horizon: the dropped tail is ~e^{-50}, far below the tolerance
    auto g = make_grid_1d(-1.0, 1.0, 8, 1.0, 100);
    const ProblemSpec spec = basic_spec(1.0, 0.02);
    ScalarField f(g);
    for (int k = 0; k <= g->nt; ++k)
        for (int i = 0; i <= g->nx[0]; ++i) {
            const double x = g->x0(i);
            f.at(k, i) = std::max(0.0, 0.5 - x * x);
        }
    auto tr = energy_trace(f, spec);
    for (double I : tr.I) CHECK(I == 0.0);
    for (int k = 0; k < g->nt; ++k) CHECK(tr.E[k + 1] <= tr.E[k] + 1e-15);
    // E is flat while the horizon is still far away
    for (int k = 0; k <= g->nt / 2; ++k)
        CHECK(std::abs(tr.E[k] - tr.E[0]) <= 1e-10 * tr.E[0]);
    CHECK(tr.R[0] == doctest::Approx(tr.R[g->nt]).epsilon(1e-14));
}

TEST_CASE("trace csv format") {
    auto g = make_grid_1d(-1.0, 1.0, 4, 0.5, 2);
    const ProblemSpec spec = basic_spec(1.0, 0.25);
    auto u = random_field(g, 0.0, 1.0, 77);
    auto tr = energy_trace(u, spec);
    const std::string path = "trace_csv_test.csv";
    write_trace_csv(tr, path);
    std::ifstream in(path);
    std::string header;
    std::getline(in, header);
    CHECK(header == "t,I,R,E");
    std::string line;
    int rows = 0;
    while (std::getline(in, line)) {
        double t, I, R, E;
        REQUIRE(std::sscanf(line.c_str(), "%lf,%lf,%lf,%lf", &t, &I, &R, &E) == 4);
        if (rows == 0) CHECK(E == doctest::Approx(tr.E[0]).epsilon(1e-15));
        ++rows;
    }
    CHECK(rows == g->nt + 1);
    std::remove(path.c_str());
}

TEST_CASE("gradient of the energy vanishes only via pinned rows") {
    // gradient rows on pinned nodes are zeroed; free rows match a dense
    // finite-difference of the energy even across the kink when u > 0
    auto g = make_grid_1d(-1.0, 1.0, 4, 0.5, 2);
    const ProblemSpec spec = basic_spec(1.0, 0.2);
    auto u = random_field(g, 0.2, 1.0, 5);
    auto G = energy_gradient(u, spec);
    auto pinned = pinned_mask(*g, spec.bc);
    const double h = 1e-6;
    for (std::size_t n = 0; n < u.v.size(); ++n) {
        if (pinned[n]) {
            CHECK(G.v[n] == 0.0);
            continue;
        }
        ScalarField up = u, dn = u;
        up.v[n] += h;
        dn.v[n] -= h;
        const double fd =
            (weighted_energy(up, spec).total - weighted_energy(dn, spec).total) / (2 * h);
        CHECK(std::abs(fd - G.v[n]) <= 1e-6 * std::max(1.0, std::abs(G.v[n])));
    }
}

TEST_CASE("operator diagonal matches unit-vector probes") {
    auto g = make_grid_1d(-1.0, 1.0, 4, 0.5, 3);
    const ProblemSpec spec = basic_spec(1.5, 0.2);
    auto state = random_field(g, 0.3, 1.0, 13);
    auto op = make_operator(state, spec, mode_weighted(spec), 0.0);
    std::vector<double> diag(state.v.size());
    op.diagonal(diag.data());
    std::vector<double> e(state.v.size(), 0.0), out(state.v.size());
    for (std::size_t n = 0; n < state.v.size(); ++n) {
        if (op.pinned[n]) continue;
        e[n] = 1.0;
        op.apply(e.data(), out.data());
        CHECK(out[n] == doctest::Approx(diag[n]).epsilon(1e-12));
        e[n] = 0.0;
    }
}
