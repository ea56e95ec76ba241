#pragma once

#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace idsc {

/// Runs body(worker) for worker in [0, workers) on separate threads and
/// rethrows the first exception. Callers partition work by worker index and
/// merge results afterwards in a fixed order, so the output never depends on
/// the worker count.
template <typename Body>
void run_workers(unsigned workers, Body&& body)
{
    if (workers <= 1) {
        body(0u);
        return;
    }
    std::exception_ptr first;
    std::mutex mu;
    {
        std::vector<std::jthread> pool;
        pool.reserve(workers);
        for (unsigned w = 0; w < workers; ++w) {
            pool.emplace_back([&, w] {
                try {
                    body(w);
                } catch (...) {
                    std::lock_guard lock(mu);
                    if (!first) first = std::current_exception();
                }
            });
        }
    }
    if (first) std::rethrow_exception(first);
}

} // namespace idsc
