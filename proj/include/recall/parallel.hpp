#pragma once

#include <algorithm>
#include <cstdlib>
#include <functional>
#include <thread>
#include <vector>

namespace recall {

// Worker fan-out cap: RECALL_GYM_THREADS, else hardware concurrency.
inline int max_threads() {
    if (const char* env = std::getenv("RECALL_GYM_THREADS")) {
        const int n = std::atoi(env);
        if (n > 0) return n;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? static_cast<int>(hw) : 1;
}

// Static block partition. Callers must make per-index work independent
// (per-query rng streams derived from the master seed), so serial and
// parallel execution produce identical results.
inline void parallel_for(int n, const std::function<void(int)>& body) {
    const int workers = std::min(max_threads(), n);
    if (workers <= 1) {
        for (int i = 0; i < n; ++i) body(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int t = 0; t < workers; ++t) {
        pool.emplace_back([&, t] {
            for (int i = t; i < n; i += workers) body(i);
        });
    }
    for (auto& th : pool) th.join();
}

}  // namespace recall
