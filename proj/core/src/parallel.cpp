#include "editodds/parallel.hpp"

#include <atomic>
#include <condition_variable>
#include <memory>
#include <mutex>
#include <vector>

namespace editodds {

namespace {

// State of one parallel_for call. Workers hold a shared_ptr, so a worker that
// wakes late still sees the job it was dispatched for; its chunk counter is
// never reset, which keeps stale workers away from the callable.
struct Job {
    const std::function<void(std::int64_t, std::int64_t)>* fn = nullptr;
    std::int64_t n = 0;
    std::int64_t chunk = 1;
    std::atomic<std::int64_t> next{0};
    int in_flight = 0;

    void run_chunks() {
        for (;;) {
            const std::int64_t begin = next.fetch_add(chunk);
            if (begin >= n) break;
            (*fn)(begin, std::min(n, begin + chunk));
        }
    }
};

}  // namespace

struct ThreadPool::Impl {
    std::mutex mutex;
    std::condition_variable wake;
    std::condition_variable done;
    std::vector<std::thread> workers;
    std::shared_ptr<Job> job;
    std::uint64_t generation = 0;
    bool stop = false;

    void worker_loop() {
        std::uint64_t seen = 0;
        for (;;) {
            std::shared_ptr<Job> current;
            {
                std::unique_lock lock(mutex);
                wake.wait(lock, [&] { return stop || generation != seen; });
                if (stop) return;
                seen = generation;
                current = job;
                ++current->in_flight;
            }
            current->run_chunks();
            {
                std::lock_guard lock(mutex);
                --current->in_flight;
            }
            done.notify_all();
        }
    }
};

ThreadPool::ThreadPool(int threads) : threads_(threads < 1 ? 1 : threads) {
    if (threads_ == 1) return;
    impl_ = new Impl;
    impl_->workers.reserve(static_cast<size_t>(threads_ - 1));
    for (int t = 0; t < threads_ - 1; ++t) {
        impl_->workers.emplace_back([this] { impl_->worker_loop(); });
    }
}

ThreadPool::~ThreadPool() {
    if (!impl_) return;
    {
        std::lock_guard lock(impl_->mutex);
        impl_->stop = true;
    }
    impl_->wake.notify_all();
    for (auto& w : impl_->workers) w.join();
    delete impl_;
}

void ThreadPool::parallel_for(std::int64_t n,
                              const std::function<void(std::int64_t, std::int64_t)>& fn) {
    if (n <= 0) return;
    if (!impl_ || n < 2) {
        fn(0, n);
        return;
    }
    auto job = std::make_shared<Job>();
    job->fn = &fn;
    job->n = n;
    // 4 chunks per thread balances uneven per-index costs (article histories
    // vary wildly) without hammering the counter.
    const std::int64_t chunks = static_cast<std::int64_t>(threads_) * 4;
    job->chunk = std::max<std::int64_t>(1, (n + chunks - 1) / chunks);
    {
        std::lock_guard lock(impl_->mutex);
        impl_->job = job;
        ++impl_->generation;
    }
    impl_->wake.notify_all();
    job->run_chunks();
    // All chunks are consumed once our own loop exits; wait out any worker
    // still inside one. Workers that wake later find the counter exhausted
    // and never touch fn.
    std::unique_lock lock(impl_->mutex);
    impl_->done.wait(lock, [&] { return job->in_flight == 0; });
}

}  // namespace editodds
