#pragma once

#include <string>
#include <vector>

#include "wied/grid.hpp"
#include "wied/model.hpp"
#include "wied/solver.hpp"

namespace wied {

struct ParabolicStep {
    int step = 0;
    int newton_iters = 0;
    double residual = 0.0;
};

struct ParabolicRun {
    ScalarField u;            // full space-time field, slice 0 = datum
    std::vector<ParabolicStep> steps;
    ParabolicRun() = default;
};

// implicit Euler marching of u_t - Lap u = -f_gamma(u); every step is solved
// by the same semismooth machinery as the space-time minimizer (active set
// for gamma=1, damped Newton otherwise).  spec.epsilon is ignored.
// f_enabled=false drops the nonlinearity (heat flow), used by self-tests.
ParabolicRun solve_parabolic(const ProblemSpec& spec, GridPtr grid,
                             const SolverConfig& config, bool f_enabled = true);

// CSV with header step,newton_iters,residual
void write_step_csv(const std::vector<ParabolicStep>& steps, const std::string& path);

// deterministic bank of compactly supported space-time bumps: four centers,
// three widths each, quartic profile (1 - d^2)^2, zero on the parabolic and
// lateral boundaries
std::vector<ScalarField> build_test_bank(GridPtr grid);

// max over the bank of |sum (u_t eta + grad u . grad eta + f_gamma(u) eta)|
// with quadrature independent of both solvers (midpoint in time for u_t,
// trapezoid in time for the other terms)
double strong_residual(const ScalarField& field, const ProblemSpec& spec,
                       const std::vector<ScalarField>& bank);

} // namespace wied
