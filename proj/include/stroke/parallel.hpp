#pragma once

#include <algorithm>
#include <cstdint>
#include <thread>
#include <vector>

namespace stroke {

// Worker cap: STROKEBENCH_THREADS if set, else hardware concurrency.
int worker_count();
void set_worker_count(int n); // 0 restores the default

// Splits [0,n) into contiguous chunks, one worker per chunk. Each index must
// be independent of the others; under that contract results do not depend on
// the worker count, which keeps deterministic mode free.
template <typename F>
void parallel_for(std::int64_t n, F&& fn) {
    if (n <= 0) {
        return;
    }
    const int workers = std::min<std::int64_t>(worker_count(), n);
    if (workers <= 1) {
        fn(std::int64_t{0}, n);
        return;
    }
    const std::int64_t chunk = (n + workers - 1) / workers;
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers - 1));
    for (int t = 1; t < workers; ++t) {
        const std::int64_t lo = t * chunk;
        const std::int64_t hi = std::min<std::int64_t>(lo + chunk, n);
        if (lo >= hi) {
            break;
        }
        pool.emplace_back([&fn, lo, hi] { fn(lo, hi); });
    }
    fn(std::int64_t{0}, std::min<std::int64_t>(chunk, n));
    for (auto& th : pool) {
        th.join();
    }
}

} // namespace stroke
