#pragma once

#include <atomic>
#include <cstddef>
#include <cstdlib>
#include <exception>
#include <string>
#include <thread>
#include <vector>

namespace varreg {

/// Worker cap from VARREG_THREADS (0 or unset = hardware concurrency).
inline unsigned thread_limit() {
    unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    const char* env = std::getenv("VARREG_THREADS");
    if (env == nullptr) return hw;
    unsigned long v = std::strtoul(env, nullptr, 10);
    if (v == 0) return hw;
    return static_cast<unsigned>(v);
}

namespace detail {
inline thread_local bool inside_parallel_region = false;
}

/// Static-chunked parallel loop over [0, n). Each index must be independent;
/// chunk boundaries are deterministic, so any writes indexed by i land in the
/// same place regardless of schedule. Nested calls run serially.
template <typename Fn>
void parallel_for(std::size_t n, Fn&& fn, std::size_t grain = 1024) {
    unsigned workers = thread_limit();
    if (n == 0) return;
    if (workers <= 1 || n < 2 * grain || detail::inside_parallel_region) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::size_t chunks = std::min<std::size_t>(workers, (n + grain - 1) / grain);
    std::size_t per = (n + chunks - 1) / chunks;
    std::vector<std::thread> pool;
    pool.reserve(chunks);
    std::exception_ptr first_error;
    std::atomic_flag error_claimed = ATOMIC_FLAG_INIT;
    for (std::size_t c = 0; c < chunks; ++c) {
        std::size_t lo = c * per;
        std::size_t hi = std::min(n, lo + per);
        if (lo >= hi) break;
        pool.emplace_back([lo, hi, &fn, &first_error, &error_claimed] {
            detail::inside_parallel_region = true;
            try {
                for (std::size_t i = lo; i < hi; ++i) fn(i);
            } catch (...) {
                if (!error_claimed.test_and_set()) first_error = std::current_exception();
            }
            detail::inside_parallel_region = false;
        });
    }
    for (auto& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

}  // namespace varreg
