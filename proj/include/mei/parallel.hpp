#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace mei {

/// Splits [0, n) into `workers` contiguous chunks and calls fn(worker, begin, end)
/// on each. Chunk boundaries depend only on (n, workers). Exceptions from any
/// worker are rethrown on the calling thread.
template <class Fn>
void parallel_chunks(std::size_t n, unsigned workers, Fn&& fn)
{
    workers = std::max(1u, workers);
    if (workers == 1 || n < 2) {
        fn(0u, std::size_t{0}, n);
        return;
    }
    std::vector<std::exception_ptr> errors(workers);
    {
        std::vector<std::jthread> pool;
        pool.reserve(workers);
        for (unsigned w = 0; w < workers; ++w) {
            const std::size_t begin = n * w / workers;
            const std::size_t end = n * (w + 1) / workers;
            pool.emplace_back([&, w, begin, end] {
                try {
                    fn(w, begin, end);
                } catch (...) {
                    errors[w] = std::current_exception();
                }
            });
        }
    }
    for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
}

}  // namespace mei
