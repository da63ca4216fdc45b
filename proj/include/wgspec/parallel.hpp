#pragma once

#include <atomic>
#include <cstddef>
#include <thread>
#include <vector>

namespace wgspec::detail {

// Run body(i) for i in [0, n) across worker threads. Results must be written
// to per-index slots; the call returns after all indices complete.
template <class F>
void parallel_for(std::size_t n, F&& body, int threads = 0) {
    if (n == 0) return;
    std::size_t workers = threads > 0 ? static_cast<std::size_t>(threads)
                                      : std::thread::hardware_concurrency();
    if (workers == 0) workers = 1;
    workers = std::min(workers, n);
    if (workers == 1) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (std::size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1)) body(i);
        });
    }
    for (auto& th : pool) th.join();
}

}  // namespace wgspec::detail
