#ifndef GREEDYFOOL_DETAIL_PARALLEL_HPP
#define GREEDYFOOL_DETAIL_PARALLEL_HPP

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace greedyfool::detail {

/// Runs fn(i) for i in [0, n) on up to `workers` threads. The first exception
/// (lowest index among those that threw) is rethrown after all workers join.
template <typename Fn>
void parallel_for(std::size_t n, std::size_t workers, Fn&& fn)
{
    workers = std::clamp<std::size_t>(workers, 1, std::max<std::size_t>(n, 1));
    if (workers == 1) {
        for (std::size_t i = 0; i < n; ++i)
            fn(i);
        return;
    }

    std::atomic<std::size_t> next{0};
    std::mutex error_mutex;
    std::exception_ptr error;
    std::size_t error_index = n;
    std::atomic<bool> stop{false};

    auto worker = [&] {
        for (;;) {
            if (stop.load(std::memory_order_relaxed))
                return;
            const std::size_t i = next.fetch_add(1);
            if (i >= n)
                return;
            try {
                fn(i);
            }
            catch (...) {
                std::lock_guard lock(error_mutex);
                if (i < error_index) {
                    error_index = i;
                    error = std::current_exception();
                }
                stop = true;
            }
        }
    };

    {
        std::vector<std::jthread> pool;
        pool.reserve(workers);
        for (std::size_t w = 0; w < workers; ++w)
            pool.emplace_back(worker);
    }
    if (error)
        std::rethrow_exception(error);
}

} // namespace greedyfool::detail

#endif // GREEDYFOOL_DETAIL_PARALLEL_HPP
