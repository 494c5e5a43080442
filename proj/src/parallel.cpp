#include "fairgp/parallel.hpp"

#include <algorithm>
#include <cstdlib>
#include <thread>
#include <vector>

namespace fairgp {

unsigned worker_count() {
    static const unsigned count = [] {
        if (const char* env = std::getenv("FAIRGP_THREADS")) {
            const long v = std::strtol(env, nullptr, 10);
            if (v >= 1) return static_cast<unsigned>(v);
        }
        const unsigned hw = std::thread::hardware_concurrency();
        return hw == 0 ? 1u : hw;
    }();
    return count;
}

void parallel_for_rows(std::size_t n, const std::function<void(std::size_t, std::size_t)>& fn) {
    const unsigned workers = std::min<std::size_t>(worker_count(), n);
    if (workers <= 1) {
        fn(0, n);
        return;
    }
    std::vector<std::thread> threads;
    threads.reserve(workers);
    const std::size_t chunk = (n + workers - 1) / workers;
    for (unsigned w = 0; w < workers; ++w) {
        const std::size_t b = std::min(n, w * chunk);
        const std::size_t e = std::min(n, b + chunk);
        if (b >= e) break;
        threads.emplace_back([&, b, e] { fn(b, e); });
    }
    for (auto& t : threads) t.join();
}

}  // namespace fairgp
