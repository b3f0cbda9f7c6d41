#include "cprrtc/worker_team.hpp"

#include <algorithm>

namespace cprrtc {

WorkerTeam::WorkerTeam(std::size_t size)
    : size_(std::max<std::size_t>(size, 1)), barrier_(static_cast<std::ptrdiff_t>(size_)) {
    threads_.reserve(size_ - 1);
    for (std::size_t i = 1; i < size_; ++i) threads_.emplace_back([this, i] { worker_loop(i); });
}

WorkerTeam::~WorkerTeam() {
    {
        std::lock_guard lock(mutex_);
        stopping_ = true;
    }
    wake_.notify_all();
    for (auto& t : threads_) t.join();
}

void WorkerTeam::run(const std::function<void(std::size_t)>& body) {
    {
        std::lock_guard lock(mutex_);
        job_ = &body;
        pending_ = size_ - 1;
        error_ = nullptr;
        ++generation_;
    }
    wake_.notify_all();
    try {
        body(0);
    } catch (...) {
        std::lock_guard lock(mutex_);
        if (!error_) error_ = std::current_exception();
    }
    std::unique_lock lock(mutex_);
    done_.wait(lock, [this] { return pending_ == 0; });
    job_ = nullptr;
    if (error_) std::rethrow_exception(error_);
}

void WorkerTeam::worker_loop(std::size_t index) {
    std::size_t seen = 0;
    for (;;) {
        const std::function<void(std::size_t)>* job;
        {
            std::unique_lock lock(mutex_);
            wake_.wait(lock, [&] { return stopping_ || generation_ != seen; });
            if (stopping_) return;
            seen = generation_;
            job = job_;
        }
        try {
            (*job)(index);
        } catch (...) {
            std::lock_guard lock(mutex_);
            if (!error_) error_ = std::current_exception();
        }
        {
            std::lock_guard lock(mutex_);
            --pending_;
        }
        done_.notify_one();
    }
}

}  // namespace cprrtc
