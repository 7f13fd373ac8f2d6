#include "wied/grid.hpp"

#include <cmath>
#include <string>

namespace wied {

namespace {

bool close(double x, double y) {
    return std::abs(x - y) <= 1e-12 * std::max({1.0, std::abs(x), std::abs(y)});
}

} // namespace

bool SpaceTimeGrid::same_box(const SpaceTimeGrid& o) const {
    if (dim != o.dim || !close(T, o.T)) return false;
    for (int d = 0; d < dim; ++d)
        if (!close(a[d], o.a[d]) || !close(b[d], o.b[d])) return false;
    return true;
}

GridPtr make_grid(int dim, std::array<std::array<double, 2>, 2> extents,
                  std::array<int, 2> nx, double T, int nt) {
    if (dim != 1 && dim != 2)
        throw parameter_error("make_grid: dim must be 1 or 2, got " + std::to_string(dim));
    auto g = std::make_shared<SpaceTimeGrid>();
    g->dim = dim;
    g->T = T;
    g->nt = nt;
    if (!(T > 0.0) || !std::isfinite(T))
        throw parameter_error("make_grid: horizon T must be positive and finite");
    if (nt < 2) throw parameter_error("make_grid: nt must be >= 2");
    g->dt = T / nt;
    for (int d = 0; d < dim; ++d) {
        const double lo = extents[d][0], hi = extents[d][1];
        if (!std::isfinite(lo) || !std::isfinite(hi) || !(hi > lo))
            throw parameter_error("make_grid: degenerate extents on axis " + std::to_string(d));
        if (nx[d] < 2)
            throw parameter_error("make_grid: nx must be >= 2 on axis " + std::to_string(d));
        g->a[d] = lo;
        g->b[d] = hi;
        g->nx[d] = nx[d];
        g->h[d] = (hi - lo) / nx[d];
    }
    if (dim == 1) {
        g->a[1] = g->b[1] = 0.0;
        g->nx[1] = 0;
        g->h[1] = 0.0;
    }
    return g;
}

GridPtr make_grid_1d(double a, double b, int nx, double T, int nt) {
    return make_grid(1, {{{a, b}, {0.0, 1.0}}}, {nx, 2}, T, nt);
}

void check_finite(const ScalarField& f, const char* what) {
    for (double x : f.v)
        if (!std::isfinite(x))
            throw data_error(std::string(what) + ": field contains a non-finite value");
}

RegionIndexSet ball_indices(const SpaceTimeGrid& g, std::array<double, 2> center,
                            double tau, double r) {
    if (!(r > 0.0) || !std::isfinite(r))
        throw parameter_error("ball_indices: radius must be positive");
    for (int d = 0; d < g.dim; ++d)
        if (center[d] < g.a[d] || center[d] > g.b[d])
            throw domain_error("ball_indices: center outside the spatial box");
    if (tau < 0.0 || tau > g.T)
        throw domain_error("ball_indices: center outside the time interval");

    RegionIndexSet s;
    s.kind = RegionIndexSet::Kind::Ball;
    s.center = center;
    s.tau = tau;
    s.r = r;
    s.clipped = (tau - r < 0.0) || (tau + r > g.T);
    for (int d = 0; d < g.dim; ++d)
        if (center[d] - r < g.a[d] || center[d] + r > g.b[d]) s.clipped = true;

    const double r2 = r * r;
    const int nj = g.dim == 2 ? g.nx[1] : 0;
    for (int k = 0; k <= g.nt; ++k) {
        const double dt2 = (g.time(k) - tau) * (g.time(k) - tau);
        if (dt2 > r2) continue;
        for (int i = 0; i <= g.nx[0]; ++i) {
            const double dx2 = (g.x0(i) - center[0]) * (g.x0(i) - center[0]);
            if (dt2 + dx2 > r2) continue;
            if (g.dim == 1) {
                s.nodes.push_back(g.index(k, i));
            } else {
                for (int j = 0; j <= nj; ++j) {
                    const double dy2 = (g.x1(j) - center[1]) * (g.x1(j) - center[1]);
                    if (dt2 + dx2 + dy2 <= r2) s.nodes.push_back(g.index(k, i, j));
                }
            }
        }
    }
    return s;
}

RegionIndexSet cylinder_indices(const SpaceTimeGrid& g, double r,
                                std::optional<std::array<double, 2>> origin) {
    if (!(r > 0.0) || !std::isfinite(r))
        throw parameter_error("cylinder_indices: radius must be positive");
    std::array<double, 2> c{0.5 * (g.a[0] + g.b[0]), 0.5 * (g.a[1] + g.b[1])};
    if (origin) {
        c = *origin;
        for (int d = 0; d < g.dim; ++d)
            if (c[d] < g.a[d] || c[d] > g.b[d])
                throw domain_error("cylinder_indices: origin outside the spatial box");
    }

    RegionIndexSet s;
    s.kind = RegionIndexSet::Kind::Cylinder;
    s.center = c;
    s.tau = 0.0;
    s.r = r;
    s.clipped = (r * r > g.T);
    for (int d = 0; d < g.dim; ++d)
        if (c[d] - r < g.a[d] || c[d] + r > g.b[d]) s.clipped = true;

    const double r2 = r * r;
    const int nj = g.dim == 2 ? g.nx[1] : 0;
    for (int k = 0; k <= g.nt; ++k) {
        const double t = g.time(k);
        if (!(t > 0.0 && t < r2)) continue;
        for (int i = 0; i <= g.nx[0]; ++i) {
            const double dx2 = (g.x0(i) - c[0]) * (g.x0(i) - c[0]);
            if (g.dim == 1) {
                if (dx2 < r2) s.nodes.push_back(g.index(k, i));
            } else {
                for (int j = 0; j <= nj; ++j) {
                    const double dy2 = (g.x1(j) - c[1]) * (g.x1(j) - c[1]);
                    if (dx2 + dy2 < r2) s.nodes.push_back(g.index(k, i, j));
                }
            }
        }
    }
    return s;
}

namespace {

// clamped cell index + barycentric weight along one axis; snaps to the
// nearest node when rounding leaves the coordinate a few ulp off it, so
// interpolation onto coincident nodes reproduces values exactly
void locate(double y, double lo, double step, int cells, int& cell, double& w) {
    double s = (y - lo) / step;
    const double snapped = std::round(s);
    if (std::abs(s - snapped) < 1e-9 && snapped >= 0.0 && snapped <= cells) s = snapped;
    cell = static_cast<int>(std::floor(s));
    if (cell < 0) cell = 0;
    if (cell > cells - 1) cell = cells - 1;
    w = s - cell;
    if (w < 0.0) w = 0.0;
    if (w > 1.0) w = 1.0;
}

} // namespace

ScalarField restrict_field(const ScalarField& f, GridPtr target) {
    const SpaceTimeGrid& src = *f.grid;
    const SpaceTimeGrid& dst = *target;
    if (!src.same_box(dst))
        throw domain_error("restrict_field: grids cover different boxes or horizons");

    ScalarField out(target);
    for (int k = 0; k <= dst.nt; ++k) {
        int kc;
        double wk;
        locate(dst.time(k), 0.0, src.dt, src.nt, kc, wk);
        for (int i = 0; i <= dst.nx[0]; ++i) {
            int ic;
            double wi;
            locate(dst.x0(i), src.a[0], src.h[0], src.nx[0], ic, wi);
            if (dst.dim == 1) {
                const double lo = (1 - wi) * f.at(kc, ic) + wi * f.at(kc, ic + 1);
                const double hi = (1 - wi) * f.at(kc + 1, ic) + wi * f.at(kc + 1, ic + 1);
                out.at(k, i) = (1 - wk) * lo + wk * hi;
            } else {
                for (int j = 0; j <= dst.nx[1]; ++j) {
                    int jc;
                    double wj;
                    locate(dst.x1(j), src.a[1], src.h[1], src.nx[1], jc, wj);
                    double acc = 0.0;
                    for (int dk = 0; dk <= 1; ++dk) {
                        const double fk = dk ? wk : 1 - wk;
                        for (int di = 0; di <= 1; ++di) {
                            const double fi = di ? wi : 1 - wi;
                            for (int dj = 0; dj <= 1; ++dj) {
                                const double fj = dj ? wj : 1 - wj;
                                acc += fk * fi * fj * f.at(kc + dk, ic + di, jc + dj);
                            }
                        }
                    }
                    out.at(k, i, j) = acc;
                }
            }
        }
    }
    return out;
}

} // namespace wied
