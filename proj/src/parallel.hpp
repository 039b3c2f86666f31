// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace tailrisk::parallel {

/// Worker count: the explicit override if set, else TAILRISK_THREADS, else
/// the hardware concurrency (0 in either place means "auto").
unsigned thread_count();

/// 0 restores the environment/automatic default.
void set_thread_count(unsigned n);

/// Runs task(i) for i in [0, n). Tasks must write only to their own slots.
/// If tasks throw, the exception of the lowest failing index is rethrown.
template <class Task>
void for_each_index(std::size_t n, Task&& task) {
    const std::size_t workers = std::min<std::size_t>(thread_count(), n);
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) task(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::mutex mu;
    std::size_t failed_index = n;
    std::exception_ptr failure;
    auto run = [&] {
        for (std::size_t i; (i = next.fetch_add(1)) < n;) {
            try {
                task(i);
            } catch (...) {
                std::lock_guard lock(mu);
                if (i < failed_index) {
                    failed_index = i;
                    failure = std::current_exception();
                }
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(workers - 1);
    for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(run);
    run();
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
}

}  // namespace tailrisk::parallel
