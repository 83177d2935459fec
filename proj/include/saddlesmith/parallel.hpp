#ifndef SADDLESMITH_PARALLEL_HPP
#define SADDLESMITH_PARALLEL_HPP

#include <atomic>
#include <cstdlib>
#include <functional>
#include <thread>
#include <vector>

namespace saddlesmith {

// Worker count: min(hardware, SADDLESMITH_THREADS). Results must not depend on it;
// parallel_for only fans out independent index ranges.
inline unsigned worker_count() {
    unsigned hw = std::thread::hardware_concurrency();
    if (hw == 0) hw = 1;
    if (const char* env = std::getenv("SADDLESMITH_THREADS")) {
        long cap = std::strtol(env, nullptr, 10);
        if (cap >= 1 && unsigned(cap) < hw) hw = unsigned(cap);
    }
    return hw;
}

template <typename F>
void parallel_for(std::size_t n, F&& body) {
    unsigned workers = worker_count();
    if (workers <= 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    unsigned spawn = std::min<std::size_t>(workers, n);
    pool.reserve(spawn);
    for (unsigned t = 0; t < spawn; ++t) {
        pool.emplace_back([&] {
            for (;;) {
                std::size_t i = next.fetch_add(1);
                if (i >= n) return;
                body(i);
            }
        });
    }
    for (auto& th : pool) th.join();
}

} // namespace saddlesmith

#endif
