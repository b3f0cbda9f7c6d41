#pragma once

#include <barrier>
#include <condition_variable>
#include <cstddef>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace cprrtc {

/// How a worker-team operation executes. `deterministic` runs every worker's
/// share in index order on the calling thread; `concurrent` uses a
/// WorkerTeam with real barriers. Both must leave identical buffers.
enum class Execution { deterministic, concurrent };

/// Fixed-size group of persistent threads that execute one job at a time,
/// the CPU stand-in for a GPU thread block. The calling thread acts as
/// worker 0. Inside a job, sync() is a full barrier across the team.
///
/// A job must reach the same number of sync() calls on every worker and must
/// not throw between them.
class WorkerTeam {
public:
    explicit WorkerTeam(std::size_t size = std::thread::hardware_concurrency());
    ~WorkerTeam();
    WorkerTeam(const WorkerTeam&) = delete;
    WorkerTeam& operator=(const WorkerTeam&) = delete;

    std::size_t size() const { return size_; }

    /// Runs body(worker) on all workers and returns when every worker is done.
    void run(const std::function<void(std::size_t)>& body);

    void sync() { barrier_.arrive_and_wait(); }

    /// Indices handled by `worker` when `count` items are spread over the
    /// team: worker, worker + size, ...
    template <class F>
    void for_each_assigned(std::size_t worker, std::size_t begin, std::size_t end, F&& f) const {
        for (std::size_t i = begin + worker; i < end; i += size_) f(i);
    }

private:
    void worker_loop(std::size_t index);

    std::size_t size_;
    std::barrier<> barrier_;
    std::vector<std::thread> threads_;

    std::mutex mutex_;
    std::condition_variable wake_;
    std::condition_variable done_;
    const std::function<void(std::size_t)>* job_ = nullptr;
    std::size_t generation_ = 0;
    std::size_t pending_ = 0;
    bool stopping_ = false;
    std::exception_ptr error_;
};

}  // namespace cprrtc
