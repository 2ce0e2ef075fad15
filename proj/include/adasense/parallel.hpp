// parallel.hpp
#pragma once
#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <string>
#include <thread>
#include <vector>

namespace adasense {

// ADASENSE_THREADS caps worker count; default is the machine's parallelism.
inline std::size_t configured_threads() {
    if (const char* env = std::getenv("ADASENSE_THREADS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && v > 0) return static_cast<std::size_t>(v);
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

// Evaluates fn(i) for i in [0, count) on up to `threads` workers and returns
// the results in index order. If any call throws, the exception from the
// lowest failing index is rethrown.
template <class T, class F>
std::vector<T> parallel_map(std::size_t count, F&& fn, std::size_t threads = configured_threads()) {
    std::vector<T> out(count);
    if (count == 0) return out;
    threads = std::clamp<std::size_t>(threads, 1, count);
    if (threads == 1) {
        for (std::size_t i = 0; i < count; ++i) out[i] = fn(i);
        return out;
    }
    std::vector<std::exception_ptr> errors(count);
    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= count || failed.load()) return;
            try {
                out[i] = fn(i);
            } catch (...) {
                errors[i] = std::current_exception();
                failed.store(true);
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
    return out;
}

} // namespace adasense
