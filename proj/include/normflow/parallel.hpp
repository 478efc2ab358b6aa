#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace normflow {

namespace detail {
inline std::atomic<int>& thread_setting()
{
    static std::atomic<int> value{0};
    return value;
}
} // namespace detail

/// Worker count for slot-parallel loops. 0 means "read NORMFLOW_THREADS,
/// default 1". Results never depend on this value.
inline void set_thread_count(int threads) { detail::thread_setting() = std::max(0, threads); }

inline int thread_count()
{
    const int set = detail::thread_setting();
    if (set > 0) return set;
    if (const char* env = std::getenv("NORMFLOW_THREADS")) {
        try {
            const int v = std::stoi(env);
            if (v > 0) return v;
        } catch (const std::exception&) {
        }
    }
    return 1;
}

/// Calls body(i) for i in [0, count). Each index is written by exactly one
/// worker, so callers that store into slot i get thread-count-independent output.
template <class Body>
void parallel_for(std::size_t count, Body&& body)
{
    const auto workers = static_cast<std::size_t>(std::min<int>(thread_count(), static_cast<int>(std::max<std::size_t>(count, 1))));
    if (workers <= 1 || count < 2) {
        for (std::size_t i = 0; i < count; ++i) body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto run = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= count) return;
            try {
                body(i);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
                next = count;
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(workers - 1);
    for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(run);
    run();
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
}

} // namespace normflow
