#pragma once

#include <exception>
#include <mutex>
#include <utility>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace icc {

/// Serial trial driver; the reference engine. Results must be written
/// into per-index slots so the reduction order never depends on the
/// execution order.
template <typename Fn>
void for_each_trial_serial(long long n, Fn&& body) {
    for (long long i = 0; i < n; ++i) body(i);
}

/// Parallel trial driver. With threads > 1 (and OpenMP available) the
/// index range is split across a worker pool; otherwise it falls back to
/// the serial engine. The first exception thrown by any trial is
/// captured and rethrown after the loop.
template <typename Fn>
void for_each_trial(long long n, int threads, Fn&& body) {
#ifdef _OPENMP
    if (threads > 1) {
        std::exception_ptr err;
        std::mutex err_mutex;
#pragma omp parallel for num_threads(threads) schedule(static)
        for (long long i = 0; i < n; ++i) {
            try {
                body(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(err_mutex);
                if (!err) err = std::current_exception();
            }
        }
        if (err) std::rethrow_exception(err);
        return;
    }
#endif
    (void)threads;
    for_each_trial_serial(n, std::forward<Fn>(body));
}

} // namespace icc
