#pragma once

#include <cstdint>
#include <functional>
#include <thread>

namespace editodds {

// Chunked parallel execution over an index range. Workers pull fixed chunks
// off a shared counter; the calling thread participates. Results must be
// written to disjoint, index-addressed slots, so the chunk schedule never
// affects the outcome and any reduction the caller performs afterwards runs
// in index order regardless of the thread count.
class ThreadPool {
public:
    // threads <= 1 runs everything inline on the caller.
    explicit ThreadPool(int threads);
    ~ThreadPool();

    ThreadPool(const ThreadPool&) = delete;
    ThreadPool& operator=(const ThreadPool&) = delete;

    int threads() const { return threads_; }

    // Invokes fn(begin, end) over a partition of [0, n).
    void parallel_for(std::int64_t n, const std::function<void(std::int64_t, std::int64_t)>& fn);

    static int default_threads() {
        const unsigned hw = std::thread::hardware_concurrency();
        return hw == 0 ? 1 : static_cast<int>(hw);
    }

private:
    struct Impl;
    Impl* impl_ = nullptr;
    int threads_ = 1;
};

}  // namespace editodds
