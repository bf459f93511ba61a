#pragma once

#include <functional>
#include <thread>
#include <vector>

namespace dimcert {

inline int default_threads() {
    unsigned n = std::thread::hardware_concurrency();
    return n == 0 ? 1 : static_cast<int>(n);
}

// Runs fn(i) for i in [0, n). Work is split by stride so each index is
// computed exactly once; callers write into preallocated per-index slots
// and reduce sequentially afterwards, which keeps results independent of
// the thread count.
inline void parallel_for(int n, int threads, const std::function<void(int)>& fn) {
    if (threads <= 1 || n <= 1) {
        for (int i = 0; i < n; ++i) fn(i);
        return;
    }
    int t = std::min(threads, n);
    std::vector<std::thread> pool;
    pool.reserve(t);
    for (int w = 0; w < t; ++w) {
        pool.emplace_back([&, w] {
            for (int i = w; i < n; i += t) fn(i);
        });
    }
    for (auto& th : pool) th.join();
}

}  // namespace dimcert
