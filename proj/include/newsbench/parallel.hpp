#pragma once

#include <cstddef>
#include <thread>
#include <vector>

namespace newsbench {

// Runs f(i) for i in [0, n). Work is chunked by index so results written
// into index-addressed slots are identical for any thread count.
template <typename F>
void parallel_for(std::size_t n, int threads, F&& f) {
    if (threads <= 1 || n < 2) {
        for (std::size_t i = 0; i < n; ++i) f(i);
        return;
    }
    std::size_t worker_count = std::min<std::size_t>(static_cast<std::size_t>(threads), n);
    std::vector<std::thread> workers;
    workers.reserve(worker_count);
    for (std::size_t t = 0; t < worker_count; ++t) {
        std::size_t begin = n * t / worker_count;
        std::size_t end = n * (t + 1) / worker_count;
        workers.emplace_back([&f, begin, end]() {
            for (std::size_t i = begin; i < end; ++i) f(i);
        });
    }
    for (auto& w : workers) w.join();
}

}  // namespace newsbench
