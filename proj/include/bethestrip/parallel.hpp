#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace bethe {

// BETHE_STRIP_THREADS if set and positive, otherwise 1.
int default_workers();

// Splits [0, n) into `chunks` contiguous ranges and runs fn(lo, hi) on each,
// using up to `workers` threads (0 means default_workers()). The partition
// depends on `chunks` only. If several chunks throw, the exception from the
// lowest chunk index is rethrown.
template <class Fn>
void parallel_chunks(std::size_t n, int chunks, int workers, Fn&& fn) {
    if (n == 0) return;
    const std::size_t C = std::clamp<std::size_t>(static_cast<std::size_t>(std::max(chunks, 1)), 1, n);
    if (workers <= 0) workers = default_workers();
    const std::size_t W = std::min<std::size_t>(static_cast<std::size_t>(workers), C);
    std::vector<std::exception_ptr> errors(C);
    auto run_chunk = [&](std::size_t c) {
        try {
            fn(c * n / C, (c + 1) * n / C);
        } catch (...) {
            errors[c] = std::current_exception();
        }
    };
    if (W <= 1) {
        for (std::size_t c = 0; c < C; ++c) run_chunk(c);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> threads;
        threads.reserve(W);
        for (std::size_t w = 0; w < W; ++w)
            threads.emplace_back([&] {
                for (std::size_t c = next++; c < C; c = next++) run_chunk(c);
            });
        for (auto& t : threads) t.join();
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

}  // namespace bethe
