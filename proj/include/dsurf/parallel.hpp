#pragma once

#include <algorithm>
#include <cstddef>
#include <thread>
#include <vector>

namespace dsurf {

/// Process-wide cap on worker threads. 1 means strictly serial execution.
void set_thread_count(unsigned n);
unsigned thread_count();

/// Runs fn(i) for i in [0, n) over contiguous chunks. Callers must only write
/// to per-index outputs; reductions happen afterwards in index order.
template <typename Fn>
void parallel_for(std::size_t n, Fn&& fn, std::size_t min_chunk = 256)
{
    const unsigned threads = thread_count();
    if (threads <= 1 || n < 2 * min_chunk) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    const std::size_t workers = std::min<std::size_t>(threads, (n + min_chunk - 1) / min_chunk);
    const std::size_t chunk = (n + workers - 1) / workers;
    std::vector<std::jthread> pool;
    pool.reserve(workers - 1);
    for (std::size_t w = 1; w < workers; ++w) {
        const std::size_t begin = w * chunk;
        const std::size_t end = std::min(n, begin + chunk);
        pool.emplace_back([begin, end, &fn] {
            for (std::size_t i = begin; i < end; ++i) fn(i);
        });
    }
    for (std::size_t i = 0; i < std::min(n, chunk); ++i) fn(i);
}

} // namespace dsurf
