#include "wied/linalg.hpp"

#include <cmath>

#include "wied/errors.hpp"
#include "wied/util.hpp"

namespace wied {

namespace {

double dot(const std::vector<double>& a, const std::vector<double>& b) {
    Accum s;
    for (std::size_t n = 0; n < a.size(); ++n) s.add(a[n] * b[n]);
    return s.value();
}

} // namespace

PcgResult pcg(const std::function<void(const double*, double*)>& apply,
              const std::vector<double>& diag, const std::vector<unsigned char>& mask,
              const std::vector<double>& b, std::vector<double>& x, double rel_tol,
              int max_iter) {
    const std::size_t n = b.size();
    PcgResult res;

    std::vector<double> r(n), z(n), p(n), ap(n);
    apply(x.data(), ap.data());
    for (std::size_t i = 0; i < n; ++i) r[i] = mask[i] ? 0.0 : b[i] - ap[i];

    const double b2 = dot(b, b);
    if (b2 == 0.0) {
        for (std::size_t i = 0; i < n; ++i) x[i] = mask[i] ? x[i] : 0.0;
        res.converged = true;
        return res;
    }
    const double stop2 = rel_tol * rel_tol * b2;

    for (std::size_t i = 0; i < n; ++i) z[i] = mask[i] ? 0.0 : r[i] / diag[i];
    p = z;
    double rz = dot(r, z);
    double r2 = dot(r, r);

    for (int it = 0; it < max_iter; ++it) {
        if (r2 <= stop2) {
            res.converged = true;
            break;
        }
        apply(p.data(), ap.data());
        const double pap = dot(p, ap);
        if (!(pap > 0.0)) {
            // operator lost definiteness (should not happen for these systems)
            break;
        }
        const double alpha = rz / pap;
        for (std::size_t i = 0; i < n; ++i) {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        for (std::size_t i = 0; i < n; ++i) z[i] = mask[i] ? 0.0 : r[i] / diag[i];
        const double rz_new = dot(r, z);
        const double beta = rz_new / rz;
        rz = rz_new;
        for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
        r2 = dot(r, r);
        res.iters = it + 1;
    }
    if (r2 <= stop2) res.converged = true;
    res.rel_residual = std::sqrt(r2 / b2);
    return res;
}

void thomas_solve(std::vector<double>& dl, std::vector<double>& d, std::vector<double>& du,
                  std::vector<double>& rhs) {
    const std::size_t n = d.size();
    if (n == 0) return;
    for (std::size_t i = 1; i < n; ++i) {
        const double m = dl[i] / d[i - 1];
        d[i] -= m * du[i - 1];
        rhs[i] -= m * rhs[i - 1];
    }
    rhs[n - 1] /= d[n - 1];
    for (std::size_t i = n - 1; i-- > 0;) rhs[i] = (rhs[i] - du[i] * rhs[i + 1]) / d[i];
}

} // namespace wied
