#pragma once

#include <cstdlib>
#include <functional>
#include <thread>
#include <vector>

namespace dualsim {

// Thread count: DUALSIM_THREADS env var, else hardware concurrency.
inline unsigned thread_count() {
    if (const char* env = std::getenv("DUALSIM_THREADS")) {
        const long v = std::atol(env);
        if (v >= 1) return static_cast<unsigned>(v);
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : hw;
}

// Static split of [0,n) across threads. Each index is processed exactly once;
// the body must write only to its own slot so results are order-independent.
inline void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body) {
    const unsigned threads = thread_count();
    if (threads <= 1 || n < 2 * threads) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (unsigned t = 0; t < threads; ++t) {
        pool.emplace_back([&, t] {
            for (std::size_t i = t; i < n; i += threads) body(i);
        });
    }
    for (auto& th : pool) th.join();
}

}  // namespace dualsim
