#pragma once

#include <string>
#include <utility>
#include <vector>

#include "wied/energy.hpp"
#include "wied/grid.hpp"
#include "wied/model.hpp"

namespace wied {

struct ArmijoParams {
    double c1 = 1e-4;
    double shrink = 0.5;
    int max_backtrack = 40;
};

struct SolverConfig {
    double tol_grad = 1e-9;  // relative to the first residual
    int max_newton = 200;    // outer iteration budget across all stages
    std::vector<double> sigma_schedule{1e-2, 1e-3, 1e-4, 0.0};
    double linear_tol = 1e-10;
    int linear_maxit = 200000;
    ArmijoParams armijo;
    double weight_floor = 1e-260;  // relative floor in gradient/Hessian assembly
};

void validate_config(const SolverConfig& c);

struct SolveReport {
    bool converged = false;
    int iterations = 0;      // outer Newton / active-set iterations
    int cg_iterations = 0;
    double initial_residual = 0.0;
    double final_residual = 0.0;  // row-scaled complementarity residual, max norm
    EnergyBreakdown energy;       // unsmoothed energy of the solved functional
    double wall_time_s = 0.0;
    double min_u = 0.0;
    double max_u = 0.0;
    double max_u0 = 0.0;
    std::string message;
};

class nonconvergence_error : public std::runtime_error {
public:
    nonconvergence_error(const std::string& what, SolveReport rep)
        : std::runtime_error(what), report(std::move(rep)) {}
    SolveReport report;
};

// minimizer of the weighted functional on the u-grid; start (optional) is
// projected onto the admissible set before use
std::pair<ScalarField, SolveReport> minimize(const ProblemSpec& spec, GridPtr grid,
                                             const SolverConfig& config,
                                             const ScalarField* start = nullptr);

// same minimization in scaled time on a horizon-T/eps grid
std::pair<ScalarField, SolveReport> solve_scaled(const ProblemSpec& spec, GridPtr grid_v,
                                                 const SolverConfig& config,
                                                 const ScalarField* start = nullptr);

// Row-scaled strong-form residual of the weighted functional, f at sigma=0.
// Rows: t=0 and Dirichlet-pinned rows are 0; the t=T row carries the
// natural-condition defect; lateral Neumann rows use the mirrored stencil.
ScalarField el_residual(const ScalarField& u, const ProblemSpec& spec);

struct DoubleIneqReport {
    double max_L_minus_1 = 0.0;      // upper side, all interior nodes
    double min_L_on_positive = 0.0;  // lower side over {u > theta}
    double defect_on_zero = 0.0;     // max of (-L)_+ over {u <= theta}
    double overall = 0.0;            // worst violation of chi <= L <= 1
    std::size_t n_interior = 0;
    std::size_t n_positive = 0;
    double theta = 0.0;
};

// gamma=1 only (usage_error otherwise): L = eps*D_tt + Lap - D_t at interior
// nodes with plain central time differences
DoubleIneqReport double_inequality_check(const ScalarField& u, const ProblemSpec& spec,
                                         double theta);

// default positivity threshold: max(10*tol_grad, 1e-8*max u0)
double positivity_threshold(double tol_grad, double max_u0);

} // namespace wied
