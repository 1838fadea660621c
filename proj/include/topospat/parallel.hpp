#ifndef TOPOSPAT_PARALLEL_HPP
#define TOPOSPAT_PARALLEL_HPP

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace topospat {

/// Run `fn(i)` for every i in [0, n) on up to `threads` workers.
/// Work items are claimed dynamically, so `fn` must only write to state owned
/// by index i. The first exception thrown by any worker is rethrown.
template <class Function>
void parallel_for(std::size_t n, int threads, Function&& fn) {
    const std::size_t workers = std::min<std::size_t>(n, static_cast<std::size_t>(std::max(threads, 1)));
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) {
            fn(i);
        }
        return;
    }

    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_lock;

    auto worker = [&]() {
        while (true) {
            const std::size_t i = next.fetch_add(1);
            if (i >= n) {
                return;
            }
            try {
                fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> guard(failure_lock);
                if (!failure) {
                    failure = std::current_exception();
                }
                next.store(n);
                return;
            }
        }
    };

    {
        std::vector<std::jthread> pool;
        pool.reserve(workers - 1);
        for (std::size_t t = 1; t < workers; ++t) {
            pool.emplace_back(worker);
        }
        worker();
    }

    if (failure) {
        std::rethrow_exception(failure);
    }
}

} // namespace topospat

#endif
