#pragma once

#include <string>
#include <vector>

#include "wied/grid.hpp"
#include "wied/model.hpp"

namespace wied {

// One assembly covers both functionals:
//   weighted (u-time):  decay = 1/eps, kin = eps, spat = 1
//   scaled   (v-time):  decay = 1,     kin = 1,   spat = eps
struct FunctionalMode {
    double decay = 1.0;
    double kin = 1.0;
    double spat = 1.0;
};

FunctionalMode mode_weighted(const ProblemSpec& spec);
FunctionalMode mode_scaled(const ProblemSpec& spec);

struct QuadratureWeights {
    std::vector<double> w;     // exact cell weights e^{-l t_k} - e^{-l t_{k+1}}
    double sum = 0.0;
    int first_underflow = -1;  // first cell whose weight underflowed to 0
};

QuadratureWeights time_weights(const SpaceTimeGrid& g, double lambda);

struct EnergyBreakdown {
    double total = 0.0;
    double kinetic = 0.0;
    double dirichlet = 0.0;
    double potential = 0.0;
};

// sigma-smoothed energy under an arbitrary mode (solver internal entry point)
EnergyBreakdown energy_mode(const ScalarField& f, const ProblemSpec& spec,
                            const FunctionalMode& mode, double sigma);

EnergyBreakdown weighted_energy(const ScalarField& f, const ProblemSpec& spec);
EnergyBreakdown scaled_energy(const ScalarField& f, const ProblemSpec& spec);

// Weighted symmetric operator at a linearization state: time-coupling
// coefficients and slice weights premultiplied, nonlinearity as a diagonal.
struct EllipticOperator {
    GridPtr grid;
    double coef_ratio = 1.0;            // kin/spat, for row-scaled residuals
    std::vector<double> ctm;            // per slice m: 2*kin*w_{m-1}/dt^2
    std::vector<double> ctp;            // per slice m: 2*kin*w_m/dt^2
    std::vector<double> somega;         // per slice m: 2*spat*omega_m
    std::vector<double> fp;             // f'_sigma(u) per node
    std::vector<unsigned char> pinned;  // 1 = row/col eliminated

    // out = stencil part applied to a full (unmasked) vector, no fp term
    void apply_full(const double* in, double* out) const;
    // SPD action on the free subspace; assumes in == 0 on pinned entries
    void apply(const double* in, double* out) const;
    // as apply but with a caller-supplied mask (active-set solves)
    void apply_masked(const double* in, double* out, const unsigned char* mask) const;
    void diagonal(double* out) const;
};

// pins t=0 and, for Dirichlet, the lateral boundary at every time level
std::vector<unsigned char> pinned_mask(const SpaceTimeGrid& g, BC bc);

// weight_floor > 0 floors cell weights at weight_floor * max_k w_k
EllipticOperator make_operator(const ScalarField& u, const ProblemSpec& spec,
                               const FunctionalMode& mode, double sigma,
                               double weight_floor = 0.0);

// gradient of energy_mode; rows at pinned nodes are zero
ScalarField energy_gradient_mode(const ScalarField& u, const ProblemSpec& spec,
                                 const FunctionalMode& mode, double sigma,
                                 double weight_floor = 0.0);

ScalarField energy_gradient(const ScalarField& u, const ProblemSpec& spec);

// Newton-matrix action of the weighted functional at state `field`
ScalarField apply_linearized(const ScalarField& field, const ProblemSpec& spec,
                             const ScalarField& direction);

struct EnergyTrace {
    std::vector<double> t;      // scaled time nodes
    std::vector<double> I;      // slice kinetic, backward difference into t_k
    std::vector<double> R;      // eps * (gradient + potential) per slice
    std::vector<double> E;      // discrete forward tail sum, E[nt] = 0
    std::vector<double> I_mid;  // exact midpoint kinetic, nt entries
    double dtau = 0.0;
    double dropped_tail = 0.0;  // e^{-T_v} * R[nt], mass beyond the horizon
};

// trace of u in scaled time by pure reindexing t_k -> t_k/eps
EnergyTrace energy_trace(const ScalarField& u, const ProblemSpec& spec);

void write_trace_csv(const EnergyTrace& tr, const std::string& path);

GridPtr scaled_grid(const ProblemSpec& spec, const SpaceTimeGrid& ugrid);

// same nodal values on the horizon-T/eps grid
ScalarField reindex_to_scaled(const ScalarField& u, const ProblemSpec& spec);
// inverse of reindex_to_scaled
ScalarField reindex_to_unscaled(const ScalarField& v, const ProblemSpec& spec);

} // namespace wied
