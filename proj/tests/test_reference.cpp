#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <string>

#include "wied/grid.hpp"
#include "wied/model.hpp"
#include "wied/reference.hpp"

using namespace wied;

namespace {

ProblemSpec profile_spec(double gamma) {
    ProblemSpec s;
    s.gamma = gamma;
    s.epsilon = 0.1;  // ignored by the marcher
    s.dim = 1;
    s.bc = BC::Dirichlet;
    s.initial.kind = InitialDatum::Kind::AltPhillips;
    return s;
}

ProblemSpec bump_spec(double gamma = 1.0, BC bc = BC::Dirichlet) {
    ProblemSpec s;
    s.gamma = gamma;
    s.epsilon = 0.1;
    s.dim = 1;
    s.bc = bc;
    s.initial.kind = InitialDatum::Kind::Bump;
    s.initial.center = {0.0};
    s.initial.radius = 0.35;
    s.initial.height = 0.45;
    return s;
}

double profile_value(double x, double gamma) {
    const auto p = alt_phillips_profile(gamma);
    return x > 0.0 ? p.A * std::pow(x, p.beta) : 0.0;
}

double slice_mass(const ScalarField& u, int k) {
    const SpaceTimeGrid& g = *u.grid;
    double m = 0.0;
    for (int i = 0; i <= g.nx[0]; ++i) m += g.mass(i) * u.at(k, i);
    return m;
}

double slice_max(const ScalarField& u, int k) {
    const SpaceTimeGrid& g = *u.grid;
    double m = -1e300;
    for (int i = 0; i <= g.nx[0]; ++i) m = std::max(m, u.at(k, i));
    return m;
}

} // namespace

TEST_CASE("zero datum stays identically zero") {
    ProblemSpec s;
    s.gamma = 1.5;
    s.bc = BC::Neumann;
    auto g = make_grid_1d(-1.0, 1.0, 16, 0.5, 8);
    auto run = solve_parabolic(s, g, SolverConfig{});
    for (double x : run.u.v) CHECK(x == 0.0);
    CHECK(run.steps.size() == std::size_t(g->nt));
    for (const auto& st : run.steps) CHECK(st.residual <= 1e-15);
}

TEST_CASE("gamma=1 stationary profile is a fixed point of every step") {
    auto g = make_grid_1d(-1.0, 1.0, 32, 0.5, 16);
    const ProblemSpec spec = profile_spec(1.0);
    auto run = solve_parabolic(spec, g, SolverConfig{});
    double dev = 0.0;
    for (int k = 0; k <= g->nt; ++k)
        for (int i = 0; i <= g->nx[0]; ++i)
            dev = std::max(dev, std::abs(run.u.at(k, i) - profile_value(g->x0(i), 1.0)));
    CHECK(dev <= 1e-10);
}

TEST_CASE("gamma=1.5 profile drifts only at discretization order") {
    auto g = make_grid_1d(-1.0, 1.0, 32, 0.5, 32);
    const ProblemSpec spec = profile_spec(1.5);
    auto run = solve_parabolic(spec, g, SolverConfig{});
    double dev = 0.0;
    for (int i = 0; i <= g->nx[0]; ++i)
        dev = std::max(dev, std::abs(run.u.at(g->nt, i) - profile_value(g->x0(i), 1.5)));
    CHECK(dev <= 5e-3);  // x^4 datum: the discrete Laplacian misses by O(h^2)
}

TEST_CASE("heat flow obeys the discrete maximum principle") {
    auto g = make_grid_1d(-1.0, 1.0, 32, 0.5, 16);
    auto run = solve_parabolic(bump_spec(), g, SolverConfig{}, /*f_enabled=*/false);
    for (int k = 0; k < g->nt; ++k)
        CHECK(slice_max(run.u, k + 1) <= slice_max(run.u, k) + 1e-12);
}

TEST_CASE("neumann heat flow conserves mass") {
    auto g = make_grid_1d(-1.0, 1.0, 32, 0.5, 16);
    auto run = solve_parabolic(bump_spec(1.0, BC::Neumann), g, SolverConfig{},
                               /*f_enabled=*/false);
    const double m0 = slice_mass(run.u, 0);
    for (int k = 1; k <= g->nt; ++k)
        CHECK(std::abs(slice_mass(run.u, k) - m0) <= 1e-10 * std::abs(m0));
}

TEST_CASE("absorption keeps the evolution nonnegative and below the datum max") {
    for (double gamma : {1.0, 1.5}) {
        auto g = make_grid_1d(-1.0, 1.0, 32, 0.5, 16);
        auto run = solve_parabolic(bump_spec(gamma), g, SolverConfig{});
        double mn = 0.0;
        for (double x : run.u.v) mn = std::min(mn, x);
        CHECK(mn >= -1e-10);
        CHECK(slice_max(run.u, g->nt) <= slice_max(run.u, 0) + 1e-12);
    }
}

TEST_CASE("strong residual of the zero field is zero") {
    auto g = make_grid_1d(-1.0, 1.0, 16, 0.5, 8);
    ScalarField z(g);
    auto bank = build_test_bank(g);
    CHECK(!bank.empty());
    CHECK(strong_residual(z, bump_spec(), bank) == 0.0);
}

TEST_CASE("test bank vanishes on the parabolic and lateral boundaries") {
    auto g = make_grid_1d(-1.0, 1.0, 16, 0.5, 8);
    auto bank = build_test_bank(g);
    CHECK(bank.size() == 12);
    for (const auto& eta : bank) {
        double peak = 0.0;
        for (int i = 0; i <= g->nx[0]; ++i) CHECK(eta.at(0, i) == 0.0);
        for (int k = 0; k <= g->nt; ++k) {
            CHECK(eta.at(k, 0) == 0.0);
            CHECK(eta.at(k, g->nx[0]) == 0.0);
            for (int i = 0; i <= g->nx[0]; ++i) peak = std::max(peak, eta.at(k, i));
        }
        CHECK(peak > 0.0);
    }
}

TEST_CASE("strong residual shrinks under refinement") {
    const ProblemSpec spec = bump_spec();
    double coarse = 0.0;
    for (int lvl = 0; lvl < 2; ++lvl) {
        const int nx = 24 << lvl, nt = 24 << (2 * lvl);  // dt ~ h^2 keeps orders aligned
        auto g = make_grid_1d(-1.0, 1.0, nx, 0.5, nt);
        auto run = solve_parabolic(spec, g, SolverConfig{});
        const double res = strong_residual(run.u, spec, build_test_bank(g));
        if (lvl == 0) {
            coarse = res;
            CHECK(coarse > 0.0);
        } else {
            CHECK(res < 0.7 * coarse);
        }
    }
}

TEST_CASE("dropping the absorption leaves a visible residual") {
    const ProblemSpec spec = bump_spec();
    auto g = make_grid_1d(-1.0, 1.0, 32, 0.5, 32);
    auto heat = solve_parabolic(spec, g, SolverConfig{}, /*f_enabled=*/false);
    auto full = solve_parabolic(spec, g, SolverConfig{});
    auto bank = build_test_bank(g);
    const double res_heat = strong_residual(heat.u, spec, bank);
    const double res_full = strong_residual(full.u, spec, bank);
    CHECK(res_heat > 10.0 * res_full);  // the missing f term dominates
}

TEST_CASE("step log round-trips through csv") {
    auto g = make_grid_1d(-1.0, 1.0, 16, 0.5, 8);
    auto run = solve_parabolic(bump_spec(), g, SolverConfig{});
    const std::string path = "ref_steps_test.csv";
    write_step_csv(run.steps, path);
    FILE* fp = std::fopen(path.c_str(), "r");
    REQUIRE(fp != nullptr);
    char line[256];
    REQUIRE(std::fgets(line, sizeof line, fp) != nullptr);
    CHECK(std::string(line) == "step,newton_iters,residual\n");
    int rows = 0;
    while (std::fgets(line, sizeof line, fp)) {
        int step = -1, it = -1;
        double res = -1.0;
        REQUIRE(std::sscanf(line, "%d,%d,%lf", &step, &it, &res) == 3);
        CHECK(step == rows + 1);
        CHECK(it >= 0);
        CHECK(res >= 0.0);
        ++rows;
    }
    std::fclose(fp);
    CHECK(rows == g->nt);
    std::filesystem::remove(path);
}
