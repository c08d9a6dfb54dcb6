#include "mmlimit/util.hpp"

#include <cstdlib>

namespace mmlimit {

std::size_t worker_count() {
    if (const char* env = std::getenv("MMLIMIT_THREADS")) {
        long v = std::strtol(env, nullptr, 10);
        if (v >= 1) return static_cast<std::size_t>(v);
    }
    unsigned hw = std::thread::hardware_concurrency();
    return hw ? hw : 1;
}

void parallel_chunks(std::size_t n, std::size_t chunk,
                     const std::function<void(std::size_t, std::size_t, std::size_t)>& fn) {
    if (n == 0) return;
    if (chunk == 0) chunk = 1;
    const std::size_t nchunks = (n + chunk - 1) / chunk;
    const std::size_t nthreads = std::min(worker_count(), nchunks);
    if (nthreads <= 1) {
        for (std::size_t c = 0; c < nchunks; ++c) fn(c, c * chunk, std::min(n, (c + 1) * chunk));
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(nthreads);
    for (std::size_t t = 0; t < nthreads; ++t) {
        pool.emplace_back([&, t] {
            for (std::size_t c = t; c < nchunks; c += nthreads) fn(c, c * chunk, std::min(n, (c + 1) * chunk));
        });
    }
    for (auto& th : pool) th.join();
}

}  // namespace mmlimit
