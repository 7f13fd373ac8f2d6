#pragma once

#include <array>
#include <cstddef>
#include <memory>
#include <optional>
#include <vector>

#include "wied/errors.hpp"

namespace wied {

// Tensor grid on [a0,b0](x[a1,b1]) x [0,T], nodes at cell corners,
// flat index t-slowest: k*snodes + i*(nx1+1) + j (1D: k*(nx0+1) + i).
struct SpaceTimeGrid {
    int dim = 1;
    std::array<double, 2> a{};   // lower corner per axis
    std::array<double, 2> b{};   // upper corner per axis
    std::array<int, 2> nx{};     // cells per axis, nx[1]=0 in 1D
    double T = 0.0;
    int nt = 0;
    std::array<double, 2> h{};   // spacings, h[1]=0 in 1D
    double dt = 0.0;

    std::size_t spatial_nodes() const {
        std::size_t s = static_cast<std::size_t>(nx[0]) + 1;
        if (dim == 2) s *= static_cast<std::size_t>(nx[1]) + 1;
        return s;
    }
    std::size_t node_count() const {
        return (static_cast<std::size_t>(nt) + 1) * spatial_nodes();
    }
    std::size_t index(int k, int i, int j = 0) const {
        std::size_t sp = static_cast<std::size_t>(i);
        if (dim == 2) sp = sp * (static_cast<std::size_t>(nx[1]) + 1) + static_cast<std::size_t>(j);
        return static_cast<std::size_t>(k) * spatial_nodes() + sp;
    }
    struct Node { int k, i, j; };
    Node decode(std::size_t flat) const {
        const std::size_t sn = spatial_nodes();
        Node n{};
        n.k = static_cast<int>(flat / sn);
        std::size_t sp = flat % sn;
        if (dim == 2) {
            n.i = static_cast<int>(sp / (static_cast<std::size_t>(nx[1]) + 1));
            n.j = static_cast<int>(sp % (static_cast<std::size_t>(nx[1]) + 1));
        } else {
            n.i = static_cast<int>(sp);
            n.j = 0;
        }
        return n;
    }
    double x0(int i) const { return a[0] + i * h[0]; }
    double x1(int j) const { return a[1] + j * h[1]; }
    double time(int k) const { return k * dt; }

    // trapezoid mass along one axis
    double mass_x0(int i) const { return (i == 0 || i == nx[0]) ? 0.5 * h[0] : h[0]; }
    double mass_x1(int j) const { return (j == 0 || j == nx[1]) ? 0.5 * h[1] : h[1]; }
    double mass(int i, int j = 0) const {
        return dim == 2 ? mass_x0(i) * mass_x1(j) : mass_x0(i);
    }
    bool on_spatial_boundary(int i, int j = 0) const {
        if (i == 0 || i == nx[0]) return true;
        if (dim == 2 && (j == 0 || j == nx[1])) return true;
        return false;
    }
    bool same_box(const SpaceTimeGrid& o) const;
};

using GridPtr = std::shared_ptr<const SpaceTimeGrid>;

// extents[d] = {a_d, b_d}; in 1D extents[1]/nx[1] are ignored.
GridPtr make_grid(int dim, std::array<std::array<double, 2>, 2> extents,
                  std::array<int, 2> nx, double T, int nt);

GridPtr make_grid_1d(double a, double b, int nx, double T, int nt);

struct ScalarField {
    GridPtr grid;
    std::vector<double> v;

    ScalarField() = default;
    explicit ScalarField(GridPtr g) : grid(std::move(g)), v(grid->node_count(), 0.0) {}

    double& operator[](std::size_t n) { return v[n]; }
    double operator[](std::size_t n) const { return v[n]; }
    double& at(int k, int i, int j = 0) { return v[grid->index(k, i, j)]; }
    double at(int k, int i, int j = 0) const { return v[grid->index(k, i, j)]; }
};

// throws data_error on NaN/Inf
void check_finite(const ScalarField& f, const char* what);

struct RegionIndexSet {
    enum class Kind { Ball, Cylinder };
    Kind kind = Kind::Ball;
    std::array<double, 2> center{};  // spatial center
    double tau = 0.0;                // ball time center
    double r = 0.0;
    bool clipped = false;
    std::vector<std::size_t> nodes;
};

// closed Euclidean space-time ball |x-z|^2 + (t-tau)^2 <= r^2
RegionIndexSet ball_indices(const SpaceTimeGrid& g, std::array<double, 2> center,
                            double tau, double r);

// open cylinder {|x - x0| < r} x {0 < t < r^2}; x0 defaults to the box center
RegionIndexSet cylinder_indices(const SpaceTimeGrid& g, double r,
                                std::optional<std::array<double, 2>> origin = std::nullopt);

// multilinear interpolation onto target (same box and horizon required)
ScalarField restrict_field(const ScalarField& f, GridPtr target);

} // namespace wied
