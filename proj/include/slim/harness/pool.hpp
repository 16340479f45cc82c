#pragma once

#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <optional>
#include <thread>
#include <vector>

namespace slim::harness {

// Runs produce(i) for i in [0, n) on up to `workers` threads and hands each
// result to consume(i, result) strictly in index order, one call at a time.
// Output is therefore independent of scheduling. The first exception thrown
// by produce or consume stops the work and is rethrown.
template <typename R, typename Produce, typename Consume>
void ordered_parallel_map(std::size_t n, int workers, Produce produce, Consume consume) {
    std::vector<std::optional<R>> slots(n);
    std::mutex mu;
    std::size_t next_write = 0;
    std::atomic<std::size_t> next{0};
    std::atomic<bool> stop{false};
    std::exception_ptr error;

    auto work = [&] {
        while (!stop) {
            std::size_t i = next++;
            if (i >= n) return;
            try {
                R result = produce(i);
                std::lock_guard lock(mu);
                slots[i] = std::move(result);
                while (next_write < n && slots[next_write]) {
                    consume(next_write, std::move(*slots[next_write]));
                    slots[next_write].reset();
                    ++next_write;
                }
            } catch (...) {
                std::lock_guard lock(mu);
                if (!error) error = std::current_exception();
                stop = true;
            }
        }
    };

    std::size_t count = std::min<std::size_t>(n, static_cast<std::size_t>(workers < 1 ? 1 : workers));
    if (count <= 1) {
        work();
    } else {
        std::vector<std::jthread> threads;
        for (std::size_t t = 0; t < count; ++t) threads.emplace_back(work);
    }
    if (error) std::rethrow_exception(error);
}

} // namespace slim::harness
