#pragma once

#include <thread>
#include <vector>

namespace dsr {

// Runs fn(i) for i in [0, n) on up to `jobs` workers. Tasks must be
// independent; results land in caller-owned slots so the outcome is
// schedule-invariant.
template <typename Fn>
void parallel_for(int n, int jobs, Fn&& fn) {
    if (n <= 0) return;
    if (jobs <= 1 || n == 1) {
        for (int i = 0; i < n; ++i) fn(i);
        return;
    }
    const int workers = std::min(jobs, n);
    std::vector<std::thread> threads;
    threads.reserve(workers);
    for (int w = 0; w < workers; ++w)
        threads.emplace_back([&fn, w, n, workers]() {
            for (int i = w; i < n; i += workers) fn(i);
        });
    for (auto& th : threads) th.join();
}

}  // namespace dsr
