#include "rbising/common.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>

namespace rbising {

namespace {
std::atomic<unsigned> g_threads{0};
thread_local bool t_inside_pool = false;
}

void set_threads(unsigned n) { g_threads.store(n); }

unsigned threads()
{
    unsigned n = g_threads.load();
    if (n == 0)
        n = std::max(1u, std::thread::hardware_concurrency());
    return n;
}

void parallel_chunks(std::size_t chunks, const std::function<void(std::size_t)>& body)
{
    const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(threads(), chunks));
    if (workers <= 1 || t_inside_pool) {
        for (std::size_t c = 0; c < chunks; ++c)
            body(c);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            t_inside_pool = true;
            for (;;) {
                std::size_t c = next.fetch_add(1);
                if (c >= chunks)
                    return;
                try {
                    body(c);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mutex);
                    if (!error)
                        error = std::current_exception();
                    next.store(chunks);
                }
            }
        });
    }
    for (auto& t : pool)
        t.join();
    if (error)
        std::rethrow_exception(error);
}

} // namespace rbising
