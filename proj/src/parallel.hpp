#pragma once

#include <algorithm>
#include <cstddef>
#include <thread>
#include <vector>

namespace grank::detail {

inline unsigned resolve_threads(unsigned requested) {
    if (requested == 0) {
        requested = std::thread::hardware_concurrency();
    }
    return requested == 0 ? 1 : requested;
}

/// Runs fn(lo, hi) over a contiguous partition of [0, n). Callers keep
/// results independent of the partition by writing disjoint index ranges
/// and reducing serially afterwards.
template <typename Fn>
void parallel_chunks(std::size_t n, unsigned threads, Fn&& fn) {
    threads = std::min<std::size_t>(resolve_threads(threads), std::max<std::size_t>(n, 1));
    if (threads <= 1 || n == 0) {
        fn(std::size_t{0}, n);
        return;
    }
    const std::size_t chunk = (n + threads - 1) / threads;
    std::vector<std::jthread> workers;
    workers.reserve(threads - 1);
    for (unsigned t = 1; t < threads; ++t) {
        const std::size_t lo = std::min(n, static_cast<std::size_t>(t) * chunk);
        const std::size_t hi = std::min(n, lo + chunk);
        if (lo < hi) {
            workers.emplace_back([&fn, lo, hi] { fn(lo, hi); });
        }
    }
    fn(std::size_t{0}, std::min(n, chunk));
}

} // namespace grank::detail
