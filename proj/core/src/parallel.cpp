#include "lotenet/parallel.hpp"

#include <atomic>
#include <cstdlib>
#include <string>
#include <thread>
#include <vector>

namespace lotenet {

std::size_t worker_count() {
    static const std::size_t cached = [] {
        std::size_t n = std::thread::hardware_concurrency();
        if (n == 0) n = 1;
        if (const char* env = std::getenv("LOTENET_THREADS")) {
            char* end = nullptr;
            const unsigned long v = std::strtoul(env, &end, 10);
            if (end != env && v >= 1) n = std::min<std::size_t>(n, v);
        }
        return n;
    }();
    return cached;
}

void parallel_chunks(std::size_t count, std::size_t chunk_size,
                     const std::function<void(std::size_t, std::size_t)>& fn) {
    if (count == 0) return;
    if (chunk_size == 0) chunk_size = 1;
    const std::size_t n_chunks = (count + chunk_size - 1) / chunk_size;
    const std::size_t workers = std::min(worker_count(), n_chunks);

    if (workers <= 1) {
        for (std::size_t c = 0; c < n_chunks; ++c) {
            const std::size_t begin = c * chunk_size;
            fn(begin, std::min(begin + chunk_size, count));
        }
        return;
    }

    std::atomic<std::size_t> next{0};
    auto body = [&] {
        for (;;) {
            const std::size_t c = next.fetch_add(1);
            if (c >= n_chunks) break;
            const std::size_t begin = c * chunk_size;
            fn(begin, std::min(begin + chunk_size, count));
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(workers - 1);
    for (std::size_t i = 1; i < workers; ++i) pool.emplace_back(body);
    body();
    for (auto& t : pool) t.join();
}

}  // namespace lotenet
