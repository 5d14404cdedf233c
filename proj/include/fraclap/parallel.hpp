#pragma once

#include <cstdlib>
#include <functional>
#include <thread>
#include <vector>

namespace fraclap {

// Thread count resolution: explicit request > FRACLAP_THREADS > hardware.
inline unsigned resolve_threads(unsigned requested = 0) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("FRACLAP_THREADS")) {
        long v = std::strtol(env, nullptr, 10);
        if (v > 0) return unsigned(v);
    }
    unsigned hw = std::thread::hardware_concurrency();
    return hw ? hw : 1;
}

// Static block partition over [0, n). Each index writes only its own slots,
// so results are identical for every thread count.
inline void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body,
                         unsigned threads = 0) {
    const unsigned nt0 = resolve_threads(threads);
    const unsigned nt = nt0 > n ? unsigned(n ? n : 1) : nt0;
    if (nt <= 1) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(nt);
    const std::size_t chunk = (n + nt - 1) / nt;
    for (unsigned t = 0; t < nt; ++t) {
        const std::size_t lo = t * chunk;
        const std::size_t hi = lo + chunk < n ? lo + chunk : n;
        if (lo >= hi) break;
        pool.emplace_back([lo, hi, &body] {
            for (std::size_t i = lo; i < hi; ++i) body(i);
        });
    }
    for (auto& th : pool) th.join();
}

}
