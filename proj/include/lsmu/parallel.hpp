#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace lsmu {

// Static chunking over worker threads. Each index is processed exactly once
// and writes only to its own output slot, so results are bit-identical for
// any thread count; reductions are done by the caller in index order.
inline void parallel_for(std::int64_t n, int threads,
                         const std::function<void(std::int64_t)>& body) {
    if (n <= 0) return;
    const int t = std::max(1, std::min<std::int64_t>(threads, n));
    if (t == 1) {
        for (std::int64_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(t);
    std::exception_ptr first_error = nullptr;
    std::mutex error_mutex;
    for (int w = 0; w < t; ++w) {
        pool.emplace_back([&, w]() {
            try {
                for (std::int64_t i = w; i < n; i += t) body(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
            }
        });
    }
    for (auto& th : pool) th.join();
    if (first_error) std::rethrow_exception(first_error);
}

}  // namespace lsmu
