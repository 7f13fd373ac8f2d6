#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <vector>

namespace wied {

// Neumaier compensated accumulator; deterministic for a fixed visit order.
struct Accum {
    double s = 0.0;
    double c = 0.0;
    void add(double x) {
        const double t = s + x;
        if (std::abs(s) >= std::abs(x))
            c += (s - t) + x;
        else
            c += (x - t) + s;
        s = t;
    }
    double value() const { return s + c; }
};

// WIED_THREADS caps this; defaults to hardware concurrency, at least 1
int max_threads();

// Static block partition of [0,n); deterministic results require fn to be
// pure per index range. Runs inline when a single thread suffices.
void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& fn);

} // namespace wied
