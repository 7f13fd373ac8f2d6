#pragma once

#include <functional>
#include <vector>

namespace wied {

struct PcgResult {
    int iters = 0;
    double rel_residual = 0.0;
    bool converged = false;
};

// Jacobi-preconditioned CG on the subspace mask==0; b and x must vanish on
// masked entries, diag must be positive there (1 on masked rows).
PcgResult pcg(const std::function<void(const double*, double*)>& apply,
              const std::vector<double>& diag, const std::vector<unsigned char>& mask,
              const std::vector<double>& b, std::vector<double>& x, double rel_tol,
              int max_iter);

// In-place tridiagonal solve; dl indexed 1..n-1, du indexed 0..n-2.
// rhs is overwritten with the solution.
void thomas_solve(std::vector<double>& dl, std::vector<double>& d, std::vector<double>& du,
                  std::vector<double>& rhs);

} // namespace wied
