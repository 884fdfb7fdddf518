#include "onramp/util/thread_pool.hpp"

#include <algorithm>

namespace onramp::util {

ThreadPool::ThreadPool(int n_threads) {
  const int extra = std::max(0, n_threads - 1);
  workers_.reserve(extra);
  for (int i = 0; i < extra; ++i) {
    workers_.emplace_back([this] { worker_loop(); });
  }
}

ThreadPool::~ThreadPool() {
  {
    std::lock_guard lock(mutex_);
    stop_ = true;
  }
  cv_start_.notify_all();
  for (auto& w : workers_) w.join();
}

void ThreadPool::run(int n_tasks, const std::function<void(int)>& fn) {
  if (n_tasks <= 0) return;
  {
    std::lock_guard lock(mutex_);
    fn_ = &fn;
    n_tasks_ = n_tasks;
    next_task_ = 0;
    in_flight_ = 0;
    error_ = nullptr;
    ++generation_;
  }
  cv_start_.notify_all();
  work();  // the caller participates
  std::unique_lock lock(mutex_);
  cv_done_.wait(lock, [this] { return next_task_ >= n_tasks_ && in_flight_ == 0; });
  fn_ = nullptr;
  if (error_) std::rethrow_exception(error_);
}

void ThreadPool::work() {
  for (;;) {
    int task;
    {
      std::lock_guard lock(mutex_);
      if (next_task_ >= n_tasks_) return;
      task = next_task_++;
      ++in_flight_;
    }
    try {
      (*fn_)(task);
    } catch (...) {
      std::lock_guard lock(mutex_);
      if (!error_) error_ = std::current_exception();
    }
    {
      std::lock_guard lock(mutex_);
      --in_flight_;
      if (next_task_ >= n_tasks_ && in_flight_ == 0) cv_done_.notify_all();
    }
  }
}

void ThreadPool::worker_loop() {
  long seen = 0;
  for (;;) {
    {
      std::unique_lock lock(mutex_);
      cv_start_.wait(lock, [this, seen] { return stop_ || generation_ != seen; });
      if (stop_) return;
      seen = generation_;
    }
    work();
  }
}

}  // namespace onramp::util
