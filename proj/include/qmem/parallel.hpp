#pragma once

#include <cstddef>
#include <thread>
#include <vector>

namespace qmem {

// Runs fn(chunk_index, begin, end) over [0, n) split into fixed-size chunks.
// Chunk boundaries depend only on (n, chunk_size), so per-chunk results can be
// combined in chunk order to give answers independent of the thread count.
template <class F>
void parallel_chunks(std::size_t n, std::size_t chunk_size, int threads, F&& fn) {
    if (n == 0) return;
    if (chunk_size == 0) chunk_size = 1;
    const std::size_t n_chunks = (n + chunk_size - 1) / chunk_size;
    if (threads <= 1 || n_chunks == 1) {
        for (std::size_t c = 0; c < n_chunks; ++c) {
            const std::size_t b = c * chunk_size;
            fn(c, b, std::min(n, b + chunk_size));
        }
        return;
    }
    std::vector<std::thread> pool;
    const int n_workers = static_cast<int>(std::min<std::size_t>(threads, n_chunks));
    pool.reserve(n_workers);
    for (int w = 0; w < n_workers; ++w) {
        pool.emplace_back([&, w]() {
            for (std::size_t c = w; c < n_chunks; c += n_workers) {
                const std::size_t b = c * chunk_size;
                fn(c, b, std::min(n, b + chunk_size));
            }
        });
    }
    for (auto& t : pool) t.join();
}

// Compensated (Kahan) accumulator; keeps reductions stable and reproducible.
struct KahanSum {
    double sum = 0.0;
    double carry = 0.0;

    void add(double x) {
        const double y = x - carry;
        const double t = sum + y;
        carry = (t - sum) - y;
        sum = t;
    }
};

}  // namespace qmem
