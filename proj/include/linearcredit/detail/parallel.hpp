// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cstddef>
#include <thread>
#include <vector>

namespace linearcredit::detail {

/// Runs f(i, worker) for i in [0, n) on contiguous chunks.
template <typename F>
void parallel_for(std::size_t n, int threads, F&& f) {
    const auto workers = static_cast<std::size_t>(std::max(1, threads));
    if (workers == 1 || n < 2) {
        for (std::size_t i = 0; i < n; ++i)
            f(i, std::size_t{0});
        return;
    }
    std::vector<std::thread> pool;
    const std::size_t chunk = (n + workers - 1) / workers;
    for (std::size_t w = 0; w < workers; ++w) {
        const std::size_t lo = w * chunk;
        const std::size_t hi = std::min(n, lo + chunk);
        if (lo >= hi)
            break;
        pool.emplace_back([&f, lo, hi, w] {
            for (std::size_t i = lo; i < hi; ++i)
                f(i, w);
        });
    }
    for (auto& t : pool)
        t.join();
}

}  // namespace linearcredit::detail
