#ifndef SLFV_PARALLEL_HPP
#define SLFV_PARALLEL_HPP

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <optional>
#include <string>
#include <thread>
#include <vector>

namespace slfv
{

// Worker count: SLFV_THREADS if set to a positive integer, else the hardware concurrency.
inline unsigned worker_count()
{
    if (const char *env = std::getenv("SLFV_THREADS")) {
        try {
            const long n = std::stol(env);
            if (n > 0) {
                return static_cast<unsigned>(n);
            }
        } catch (const std::exception &) {
        }
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

/// Runs task(i) for i in [0, n) on a pool of threads and returns the results indexed by
/// i, so output order never depends on scheduling. The first exception (lowest index)
/// is rethrown after all workers stop.
template <class Task>
auto run_replicas(std::size_t n, Task &&task, unsigned threads = worker_count())
    -> std::vector<decltype(task(std::size_t{}))>
{
    using R = decltype(task(std::size_t{}));
    std::vector<std::optional<R>> slots(n);
    std::vector<std::exception_ptr> errors(n);
    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};

    const auto worker = [&] {
        while (!failed.load(std::memory_order_relaxed)) {
            const std::size_t i = next.fetch_add(1);
            if (i >= n) {
                return;
            }
            try {
                slots[i].emplace(task(i));
            } catch (...) {
                errors[i] = std::current_exception();
                failed.store(true);
            }
        }
    };

    const unsigned k = static_cast<unsigned>(std::min<std::size_t>(threads, n));
    if (k <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(k);
        for (unsigned t = 0; t < k; ++t) {
            pool.emplace_back(worker);
        }
        for (auto &t : pool) {
            t.join();
        }
    }
    for (auto &e : errors) {
        if (e) {
            std::rethrow_exception(e);
        }
    }
    std::vector<R> out;
    out.reserve(n);
    for (auto &s : slots) {
        out.push_back(std::move(*s));
    }
    return out;
}

} // namespace slfv

#endif
