#pragma once

#include <algorithm>
#include <atomic>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace lagrangia {

inline int resolve_threads(int requested) {
    if (requested > 0) return requested;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

// Runs fn(begin, end) over [0, total) split into fixed-size chunks. Chunk
// boundaries depend only on chunk_size, never on the thread count, so any
// computation whose chunks write disjoint outputs (or whose per-chunk results
// are combined in chunk order afterwards) is bit-reproducible regardless of
// how many workers execute it.
inline void parallel_chunks(long total, long chunk_size, int threads,
                            const std::function<void(long, long)>& fn) {
    if (total <= 0) return;
    threads = resolve_threads(threads);
    const long nchunks = (total + chunk_size - 1) / chunk_size;
    if (threads <= 1 || nchunks == 1) {
        for (long c = 0; c < nchunks; ++c)
            fn(c * chunk_size, std::min(total, (c + 1) * chunk_size));
        return;
    }

    std::atomic<long> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto worker = [&] {
        for (;;) {
            const long c = next.fetch_add(1);
            if (c >= nchunks) return;
            try {
                fn(c * chunk_size, std::min(total, (c + 1) * chunk_size));
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!error) error = std::current_exception();
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    const int nworkers = static_cast<int>(std::min<long>(threads, nchunks));
    pool.reserve(static_cast<std::size_t>(nworkers));
    for (int t = 0; t < nworkers; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

}  // namespace lagrangia
