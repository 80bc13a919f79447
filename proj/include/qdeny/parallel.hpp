#pragma once

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <functional>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace qdeny {

/// Worker count: QDENY_THREADS if set and positive, otherwise the hardware count.
inline unsigned worker_count() {
    if (const char *env = std::getenv("QDENY_THREADS")) {
        try {
            int v = std::stoi(env);
            if (v > 0) return static_cast<unsigned>(v);
        } catch (const std::exception &) {
        }
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

/// Runs body(i) for i in [0, count). Trials pull indices from a shared counter;
/// each body writes only its own slot, so results never depend on scheduling.
/// The first exception thrown by any body is rethrown on the caller.
inline void parallel_for(std::size_t count, const std::function<void(std::size_t)> &body, unsigned threads = worker_count()) {
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, count));
    if (threads <= 1) {
        for (std::size_t i = 0; i < count; i++) body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; t++) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < count; i = next++) {
                try {
                    body(i);
                } catch (...) {
                    std::lock_guard lock(failure_mutex);
                    if (!failure) failure = std::current_exception();
                    next = count;
                }
            }
        });
    }
    for (auto &th : pool) th.join();
    if (failure) std::rethrow_exception(failure);
}

/// Adapter matching the `for_each(count, body)` hooks of the experiment runners.
inline void parallel_runner(std::size_t count, const std::function<void(std::size_t)> &body) {
    parallel_for(count, body);
}

}  // namespace qdeny
