#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

#include "eqcount/rng.hpp"

namespace eqc {

// Worker pool width: EQCOUNT_THREADS if set, hardware concurrency otherwise.
int worker_count();

namespace detail {

// out[i] = fn(i, base.fork(i)). Indices are pulled in blocks and every slot
// is written exactly once, so the vector is identical for any worker count;
// reductions afterwards run over the fixed index order.
template <class T, class F>
std::vector<T> sample_map(std::int64_t samples, const Rng& base, F&& fn) {
    std::vector<T> out(static_cast<std::size_t>(samples));
    int workers = int(std::min<std::int64_t>(worker_count(), samples));
    if (workers <= 1) {
        for (std::int64_t i = 0; i < samples; ++i) {
            Rng r = base.fork(std::uint64_t(i));
            out[std::size_t(i)] = fn(i, r);
        }
        return out;
    }
    std::atomic<std::int64_t> next{0};
    std::exception_ptr err;
    std::mutex err_mu;
    constexpr std::int64_t block = 16;
    auto run = [&] {
        for (;;) {
            std::int64_t lo = next.fetch_add(block);
            if (lo >= samples) return;
            std::int64_t hi = std::min(lo + block, samples);
            try {
                for (std::int64_t i = lo; i < hi; ++i) {
                    Rng r = base.fork(std::uint64_t(i));
                    out[std::size_t(i)] = fn(i, r);
                }
            } catch (...) {
                std::lock_guard<std::mutex> g(err_mu);
                if (!err) err = std::current_exception();
                next.store(samples);
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(std::size_t(workers));
    for (int t = 0; t < workers; ++t) pool.emplace_back(run);
    for (auto& th : pool) th.join();
    if (err) std::rethrow_exception(err);
    return out;
}

} // namespace detail

} // namespace eqc
