#include "sqlfuzz/threads.hpp"

#include <algorithm>

namespace sqlfuzz {

ParallelMap serial_map() {
    return [](std::size_t count, const std::function<void(std::size_t)>& job) {
        for (std::size_t i = 0; i < count; ++i) job(i);
    };
}

ParallelMap pooled_map(unsigned threads) {
    if (threads <= 1) return serial_map();
    return [threads](std::size_t count, const std::function<void(std::size_t)>& job) {
        unsigned n = std::min<std::size_t>(threads, count);
        if (n <= 1) {
            for (std::size_t i = 0; i < count; ++i) job(i);
            return;
        }
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> workers;
        workers.reserve(n);
        for (unsigned w = 0; w < n; ++w) {
            workers.emplace_back([&] {
                for (;;) {
                    std::size_t i = next.fetch_add(1);
                    if (i >= count) return;
                    job(i);
                }
            });
        }
        for (auto& t : workers) t.join();
    };
}

}  // namespace sqlfuzz
