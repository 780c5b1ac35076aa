#include "granular/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <thread>
#include <vector>

namespace granular {

namespace {
std::atomic<int> g_default_threads{0};
}

int default_thread_count() {
    const int configured = g_default_threads.load();
    if (configured > 0) return configured;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(std::min(hw, 8u));
}

void set_default_thread_count(int threads) {
    g_default_threads.store(threads > 0 ? threads : 0);
}

void parallel_chunks(std::size_t n, int threads,
                     const std::function<void(std::size_t, std::size_t, int)>& fn) {
    if (n == 0) return;
    int workers = threads > 0 ? threads : default_thread_count();
    workers = static_cast<int>(std::min<std::size_t>(workers, n));
    if (workers <= 1) {
        fn(0, n, 0);
        return;
    }
    const std::size_t chunk = (n + workers - 1) / workers;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) {
        const std::size_t begin = static_cast<std::size_t>(w) * chunk;
        if (begin >= n) break;
        const std::size_t end = std::min(n, begin + chunk);
        pool.emplace_back([&fn, begin, end, w] { fn(begin, end, w); });
    }
    for (auto& t : pool) t.join();
}

} // namespace granular
