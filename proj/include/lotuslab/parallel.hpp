#pragma once

#include <functional>
#include <thread>
#include <vector>

namespace lotuslab {

/// Run fn(i) for i in [0, n) across at most `threads` workers with a
/// static contiguous partition. Results must be written to per-index
/// slots: outputs then stay identical for any worker count.
inline void parallel_for(int n, int threads, const std::function<void(int)>& fn) {
    if (threads <= 0) threads = static_cast<int>(std::thread::hardware_concurrency());
    threads = std::max(1, std::min(threads, n));
    if (threads == 1) {
        for (int i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::thread> workers;
    workers.reserve(threads);
    const int chunk = (n + threads - 1) / threads;
    for (int t = 0; t < threads; ++t) {
        const int lo = t * chunk, hi = std::min(n, lo + chunk);
        if (lo >= hi) break;
        workers.emplace_back([lo, hi, &fn] {
            for (int i = lo; i < hi; ++i) fn(i);
        });
    }
    for (auto& w : workers) w.join();
}

}  // namespace lotuslab
