#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <thread>
#include <vector>

namespace hodgewalk {

/// Worker count used by the parallel loops below.  The environment variable
/// HODGEWALK_THREADS overrides the hardware count; results never depend on it.
inline int worker_count() {
    if (const char* env = std::getenv("HODGEWALK_THREADS")) {
        char* end = nullptr;
        long v = std::strtol(env, &end, 10);
        if (end != env && v >= 1) return static_cast<int>(std::min(v, 1024L));
    }
    unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

/// Runs body(begin, end) over a static partition of [0, n).  Bodies must write
/// to disjoint, index-addressed slots so the schedule cannot change results.
template <typename Body>
void parallel_for(std::int64_t n, Body&& body) {
    if (n <= 0) return;
    int workers = std::min<std::int64_t>(worker_count(), n);
    if (workers <= 1) {
        body(std::int64_t(0), n);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(workers);
    std::int64_t chunk = (n + workers - 1) / workers;
    for (int w = 0; w < workers; ++w) {
        std::int64_t lo = w * chunk;
        std::int64_t hi = std::min(n, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([&body, lo, hi] { body(lo, hi); });
    }
    for (auto& t : pool) t.join();
}

}  // namespace hodgewalk
