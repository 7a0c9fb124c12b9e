#pragma once

#include <atomic>
#include <cstddef>
#include <exception>

namespace poreuq {

// Deterministic parallel map over [0, n): body(i) must write only to slot i
// of its outputs, so the result is independent of the schedule. The
// lowest-index exception seen is rethrown after the loop drains.
template <class F>
void parallel_for_indexed(std::size_t n, F&& body) {
    std::atomic<bool> failed{false};
    std::exception_ptr err = nullptr;
    std::size_t err_index = static_cast<std::size_t>(-1);
#pragma omp parallel for schedule(static)
    for (long long i = 0; i < static_cast<long long>(n); ++i) {
        if (failed.load(std::memory_order_relaxed)) continue;
        try {
            body(static_cast<std::size_t>(i));
        } catch (...) {
#pragma omp critical(poreuq_parallel_err)
            {
                if (static_cast<std::size_t>(i) < err_index) {
                    err_index = static_cast<std::size_t>(i);
                    err = std::current_exception();
                }
            }
            failed.store(true, std::memory_order_relaxed);
        }
    }
    if (err) std::rethrow_exception(err);
}

}  // namespace poreuq
