#pragma once

#include <array>
#include <vector>

#include "wied/grid.hpp"

namespace wied {

enum class BC { Neumann, Dirichlet };

struct InitialDatum {
    enum class Kind { Zero, Bump, AltPhillips, Tabulated };
    Kind kind = Kind::Zero;
    std::array<double, 2> center{};  // Bump
    double radius = 0.0;             // Bump
    double height = 0.0;             // Bump
    double offset = 0.0;             // AltPhillips: A*(x0-offset)_+^beta
    std::vector<double> table;       // Tabulated: one value per spatial node
};

struct ProblemSpec {
    double gamma = 1.0;    // in [1,2)
    double epsilon = 0.1;  // in (0,1]
    int dim = 1;
    BC bc = BC::Dirichlet;
    InitialDatum initial;
    double smoothing_sigma = 0.0;
};

// throws parameter_error on out-of-range gamma/epsilon/dim/sigma
void validate_spec(const ProblemSpec& spec);

// f_gamma(u) = gamma * u^{gamma-1} on {u>0}, 0 on {u<=0}; f(0)=0 selection
double f_gamma(double u, double gamma);

// (u_+)^gamma
double potential(double u, double gamma);

// monotone smoothing: gamma=1 ramp min(max(u/sigma,0),1);
// gamma in (1,2): gamma*((u+sigma)^{gamma-1} - sigma^{gamma-1}) on {u>0}
double f_gamma_smoothed(double u, double gamma, double sigma);

// antiderivative of f_gamma_smoothed with value 0 at u<=0
double potential_smoothed(double u, double gamma, double sigma);

// derivative of f_gamma_smoothed in u, clamped near u=0+ for sigma=0
double f_gamma_smoothed_prime(double u, double gamma, double sigma);

struct StationaryProfile {
    double beta;
    double A;
};

// u(x) = A x_+^beta solves u'' = f_gamma(u) on {x>0}
StationaryProfile alt_phillips_profile(double gamma);

// nodal samples of the datum on one spatial slice (spatial_nodes values)
std::vector<double> sample_initial(const InitialDatum& datum, const SpaceTimeGrid& grid,
                                   double gamma);

} // namespace wied
