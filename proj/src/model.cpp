#include "wied/model.hpp"

#include <cmath>
#include <string>

namespace wied {

namespace {
constexpr double sigma_min = 1e-10;  // Hessian clamp point for gamma in (1,2)
}

void validate_spec(const ProblemSpec& spec) {
    if (!(spec.gamma >= 1.0 && spec.gamma < 2.0))
        throw parameter_error("gamma must lie in [1,2), got " + std::to_string(spec.gamma));
    if (!(spec.epsilon > 0.0 && spec.epsilon <= 1.0))
        throw parameter_error("epsilon must lie in (0,1], got " + std::to_string(spec.epsilon));
    if (spec.dim != 1 && spec.dim != 2)
        throw parameter_error("dim must be 1 or 2");
    if (!(spec.smoothing_sigma >= 0.0))
        throw parameter_error("smoothing_sigma must be >= 0");
    if (spec.initial.kind == InitialDatum::Kind::Bump) {
        if (!(spec.initial.radius > 0.0))
            throw parameter_error("bump radius must be positive");
        if (!(spec.initial.height >= 0.0))
            throw parameter_error("bump height must be nonnegative");
    }
}

double f_gamma(double u, double gamma) {
    if (u <= 0.0) return 0.0;
    if (gamma == 1.0) return 1.0;
    return gamma * std::pow(u, gamma - 1.0);
}

double potential(double u, double gamma) {
    if (u <= 0.0) return 0.0;
    return std::pow(u, gamma);
}

double f_gamma_smoothed(double u, double gamma, double sigma) {
    if (sigma <= 0.0) return f_gamma(u, gamma);
    if (u <= 0.0) return 0.0;
    if (gamma == 1.0) return u >= sigma ? 1.0 : u / sigma;
    return gamma * (std::pow(u + sigma, gamma - 1.0) - std::pow(sigma, gamma - 1.0));
}

double potential_smoothed(double u, double gamma, double sigma) {
    if (sigma <= 0.0) return potential(u, gamma);
    if (u <= 0.0) return 0.0;
    if (gamma == 1.0)
        return u >= sigma ? u - 0.5 * sigma : 0.5 * u * u / sigma;
    // integral of gamma*((s+sigma)^{g-1} - sigma^{g-1}) ds from 0 to u
    return std::pow(u + sigma, gamma) - std::pow(sigma, gamma) -
           gamma * std::pow(sigma, gamma - 1.0) * u;
}

double f_gamma_smoothed_prime(double u, double gamma, double sigma) {
    if (u <= 0.0) return 0.0;
    if (gamma == 1.0) {
        if (sigma <= 0.0) return 0.0;
        return u >= sigma ? 0.0 : 1.0 / sigma;
    }
    if (sigma <= 0.0)
        return gamma * (gamma - 1.0) * std::pow(std::max(u, sigma_min), gamma - 2.0);
    return gamma * (gamma - 1.0) * std::pow(u + sigma, gamma - 2.0);
}

StationaryProfile alt_phillips_profile(double gamma) {
    if (!(gamma >= 1.0 && gamma < 2.0))
        throw parameter_error("alt_phillips_profile: gamma must lie in [1,2)");
    StationaryProfile p{};
    p.beta = 2.0 / (2.0 - gamma);
    p.A = std::pow(gamma / (p.beta * (p.beta - 1.0)), 1.0 / (2.0 - gamma));
    return p;
}

std::vector<double> sample_initial(const InitialDatum& datum, const SpaceTimeGrid& grid,
                                   double gamma) {
    const std::size_t sn = grid.spatial_nodes();
    std::vector<double> u0(sn, 0.0);
    const int nj = grid.dim == 2 ? grid.nx[1] : 0;

    auto fill = [&](auto&& value) {
        std::size_t n = 0;
        for (int i = 0; i <= grid.nx[0]; ++i)
            for (int j = 0; j <= nj; ++j) u0[n++] = value(grid.x0(i), grid.x1(j));
    };

    switch (datum.kind) {
    case InitialDatum::Kind::Zero:
        break;
    case InitialDatum::Kind::Bump:
        fill([&](double x, double y) {
            double d2 = (x - datum.center[0]) * (x - datum.center[0]);
            if (grid.dim == 2) d2 += (y - datum.center[1]) * (y - datum.center[1]);
            const double s = d2 / (datum.radius * datum.radius);
            return s >= 1.0 ? 0.0 : datum.height * (1.0 - s) * (1.0 - s);
        });
        break;
    case InitialDatum::Kind::AltPhillips: {
        const StationaryProfile p = alt_phillips_profile(gamma);
        fill([&](double x, double) {
            const double s = x - datum.offset;
            return s <= 0.0 ? 0.0 : p.A * std::pow(s, p.beta);
        });
        break;
    }
    case InitialDatum::Kind::Tabulated:
        if (datum.table.size() != sn)
            throw format_error("sample_initial: tabulated datum has " +
                               std::to_string(datum.table.size()) + " values, grid needs " +
                               std::to_string(sn));
        u0 = datum.table;
        break;
    }

    for (double x : u0) {
        if (!std::isfinite(x)) throw data_error("sample_initial: non-finite initial value");
        if (x < 0.0) throw data_error("sample_initial: negative initial value");
    }
    return u0;
}

} // namespace wied
