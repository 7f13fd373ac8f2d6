#pragma once

#include <string>
#include <vector>

#include "wied/energy.hpp"
#include "wied/grid.hpp"
#include "wied/model.hpp"
#include "wied/solver.hpp"

namespace wied {

struct SlabRow {
    double r = 0.0;
    double integral = 0.0;
    double ratio = 0.0;  // integral/r for time slabs, integral/c_est for unit slabs
};

struct EnergyEstimateReport {
    double kinetic_total = 0.0;         // whole-grid time-derivative square integral
    double kinetic_total_scaled = 0.0;  // same quantity computed in rescaled time
    double c_est = 0.0;                 // |u0|_{H1,h}^2 + 2|u0_+|_{gamma,h}^gamma
    double margin = 10.0;
    std::vector<SlabRow> slab_table;         // rows (r, int_0^r dirichlet+potential)
    std::vector<SlabRow> scaled_slab_table;  // unit slabs [r, r+1] in rescaled time
    std::vector<double> rejected_radii;      // below epsilon or beyond the horizon
    bool kinetic_ok = false;
    bool slabs_ok = false;
};

EnergyEstimateReport check_energy_bounds(const ScalarField& u, const ProblemSpec& spec,
                                         const std::vector<double>& radii,
                                         double margin = 10.0);

struct DerivLawReport {
    double residual_l1 = 0.0;      // dt-weighted |dE/dt + 2I| sum
    double max_E_increase = 0.0;   // max of E_{k+1} - E_k
    double cross_check_max = 0.0;  // |dE/dt - (E - I - R)| at cell midpoints
    bool monotone = false;         // increase within 1e-10 * E(0)
    double e0 = 0.0;
};

DerivLawReport check_derivative_law(const EnergyTrace& trace);

// nodes with u <= theta having a stencil neighbor above theta; t=0 excluded
std::vector<SpaceTimeGrid::Node> extract_free_boundary(const ScalarField& u, double theta);

struct NondegSample {
    SpaceTimeGrid::Node p{};
    double r = 0.0;
    double sup_u = 0.0;
    double ratio = 0.0;  // sup_u / r^2
};

struct NondegReport {
    std::vector<SpaceTimeGrid::Node> fb_points;
    std::vector<double> radii;
    std::vector<NondegSample> samples;  // admissible (unclipped) balls only
    std::size_t n_skipped = 0;          // balls clipped by the boundary or t=0
    double min_ratio = 0.0;
    double c_theory = 0.0;  // 1/(2(n+2))
    double tol_nd = 0.2;
    bool empty = true;
    bool pass = false;  // min_ratio >= c_theory * (1 - tol_nd)
};

NondegReport nondegeneracy(const ScalarField& u, const ProblemSpec& spec,
                           const std::vector<double>& radii, double theta);

// fraction of interior nodes (0 < t, lateral interior) where the
// theta-indicators of the two fields disagree
double chi_mismatch(const ScalarField& a, const ScalarField& b, double theta);

// L2 norm of a-b over the parabolic cylinder of radius r at the box center
double l2_error_cylinder(const ScalarField& a, const ScalarField& b, double r);

struct SweepRow {
    double eps = 0.0;
    double l2_error = 0.0;
    double chi = 0.0;
    bool converged = false;
    std::string note;
};

struct ConvergenceReport {
    std::vector<double> eps_list;
    std::vector<SweepRow> rows;
    double oracle_floor = 0.0;  // reference-vs-refined-reference error
    double r_region = 0.0;
    double theta = 0.0;
    bool errors_monotone = false;    // non-increasing within 5%
    bool mismatch_monotone = false;  // same slack
    bool floor_reached = false;      // final error within 2x the floor
};

ConvergenceReport eps_sweep(const ProblemSpec& base, const std::vector<double>& eps_list,
                            GridPtr grid, const SolverConfig& config, double r_region,
                            double theta);

void write_energy_report_json(const EnergyEstimateReport& r, const std::string& path);
void write_slab_csv(const EnergyEstimateReport& r, const std::string& path);
void write_derivlaw_json(const DerivLawReport& r, const std::string& path);
void write_nondeg_json(const NondegReport& r, const std::string& path);
void write_sweep_json(const ConvergenceReport& r, const std::string& path);
void write_sweep_csv(const ConvergenceReport& r, const std::string& path);

} // namespace wied
