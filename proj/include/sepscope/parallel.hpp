#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace sepscope {

/// Samples per reduction chunk. Chunk boundaries sit at absolute multiples of this value, so
/// the floating-point summation order never depends on the worker count or on where a run
/// was checkpointed (as long as checkpoints fall on chunk boundaries).
inline constexpr std::uint64_t kChunkSize = 1024;

inline std::uint64_t chunk_align_up(std::uint64_t i) { return (i + kChunkSize - 1) / kChunkSize * kChunkSize; }

/// Map-reduce over [begin, end). `map(b, e)` returns a partial accumulator for one chunk;
/// partials are merged into `acc` strictly in chunk order via `acc.merge(partial)`.
template <class Acc, class Map>
Acc chunked_reduce(std::uint64_t begin, std::uint64_t end, unsigned workers, Map&& map, Acc acc = Acc{}) {
    if (begin >= end) return acc;
    std::vector<std::uint64_t> bounds{begin};
    for (std::uint64_t b = chunk_align_up(begin + 1); b < end; b += kChunkSize)
        if (b > begin) bounds.push_back(b);
    bounds.push_back(end);
    const size_t n_chunks = bounds.size() - 1;

    workers = std::max(1u, workers);
    const size_t batch = static_cast<size_t>(workers) * 16;
    std::vector<Acc> partial;
    for (size_t first = 0; first < n_chunks; first += batch) {
        const size_t last = std::min(n_chunks, first + batch);
        partial.assign(last - first, Acc{});
        if (workers == 1) {
            for (size_t c = first; c < last; ++c) partial[c - first] = map(bounds[c], bounds[c + 1]);
        } else {
            std::atomic<size_t> next{first};
            std::exception_ptr error;
            std::mutex error_mutex;
            auto work = [&] {
                for (size_t c = next++; c < last; c = next++) {
                    try {
                        partial[c - first] = map(bounds[c], bounds[c + 1]);
                    } catch (...) {
                        std::lock_guard lock(error_mutex);
                        if (!error) error = std::current_exception();
                    }
                }
            };
            std::vector<std::thread> pool;
            const unsigned n_threads = static_cast<unsigned>(std::min<size_t>(workers, last - first));
            for (unsigned t = 0; t < n_threads; ++t) pool.emplace_back(work);
            for (auto& t : pool) t.join();
            if (error) std::rethrow_exception(error);
        }
        for (auto& p : partial) acc.merge(p);
    }
    return acc;
}

}  // namespace sepscope
