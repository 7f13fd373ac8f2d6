#include "wied/util.hpp"

#include <algorithm>
#include <cstdlib>
#include <thread>

namespace wied {

int max_threads() {
    int n = static_cast<int>(std::thread::hardware_concurrency());
    if (n < 1) n = 1;
    if (const char* env = std::getenv("WIED_THREADS")) {
        char* end = nullptr;
        const long cap = std::strtol(env, &end, 10);
        if (end != env && cap >= 1 && cap < 1024) n = std::min<long>(n, cap);
    }
    return n;
}

void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& fn) {
    const std::size_t nth = std::min<std::size_t>(max_threads(), n);
    if (nth <= 1 || n < 4096) {
        fn(0, n);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(nth);
    const std::size_t chunk = (n + nth - 1) / nth;
    for (std::size_t t = 0; t < nth; ++t) {
        const std::size_t lo = t * chunk;
        const std::size_t hi = std::min(n, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([&fn, lo, hi] { fn(lo, hi); });
    }
    for (auto& th : pool) th.join();
}

} // namespace wied
