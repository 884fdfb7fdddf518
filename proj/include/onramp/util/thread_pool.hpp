#pragma once

#include <condition_variable>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace onramp::util {

// Minimal reusable pool for deterministic fan-out work: run(n, fn) executes
// fn(0..n-1) across the workers and blocks until all tasks finish. Task
// outputs must go to per-task storage; any reduction is the caller's job
// (done in task order, results stay independent of the thread count).
class ThreadPool {
 public:
  explicit ThreadPool(int n_threads);
  ~ThreadPool();

  ThreadPool(const ThreadPool&) = delete;
  ThreadPool& operator=(const ThreadPool&) = delete;

  int size() const { return static_cast<int>(workers_.size()) + 1; }

  // Runs fn(i) for i in [0, n_tasks). The calling thread participates.
  // Rethrows the first task exception after all tasks drain.
  void run(int n_tasks, const std::function<void(int)>& fn);

 private:
  void worker_loop();
  void work();

  std::vector<std::thread> workers_;
  std::mutex mutex_;
  std::condition_variable cv_start_;
  std::condition_variable cv_done_;
  const std::function<void(int)>* fn_ = nullptr;
  int n_tasks_ = 0;
  int next_task_ = 0;
  int in_flight_ = 0;
  long generation_ = 0;
  bool stop_ = false;
  std::exception_ptr error_;
};

}  // namespace onramp::util
