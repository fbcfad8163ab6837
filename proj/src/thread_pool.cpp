#include "gridloc/thread_pool.hpp"

#include <algorithm>

namespace gridloc {

ThreadPool::ThreadPool(int threads) {
  if (threads <= 0) {
    threads = static_cast<int>(std::thread::hardware_concurrency());
    if (threads <= 0) threads = 1;
  }
  for (int i = 0; i < threads - 1; ++i) {
    workers_.emplace_back([this] { worker_loop(); });
  }
}

ThreadPool::~ThreadPool() {
  {
    std::lock_guard<std::mutex> lock(mutex_);
    stop_ = true;
  }
  cv_work_.notify_all();
  for (auto& w : workers_) w.join();
}

void ThreadPool::parallel_for(std::size_t begin, std::size_t end,
                              const std::function<void(std::size_t)>& fn) {
  if (end <= begin) return;
  const std::size_t n = end - begin;
  if (workers_.empty() || n == 1) {
    for (std::size_t i = begin; i < end; ++i) fn(i);
    return;
  }
  const std::size_t chunk =
      std::max<std::size_t>(1, n / (4 * (workers_.size() + 1)));
  {
    std::lock_guard<std::mutex> lock(mutex_);
    job_.fn = &fn;
    job_.begin = begin;
    job_.end = end;
    job_.chunk = chunk;
    job_.next = begin;
    job_.pending = (n + chunk - 1) / chunk;
    ++job_.generation;
  }
  cv_work_.notify_all();
  while (run_one_chunk(job_)) {
  }
  std::unique_lock<std::mutex> lock(mutex_);
  cv_done_.wait(lock, [this] { return job_.pending == 0; });
  job_.fn = nullptr;
}

bool ThreadPool::run_one_chunk(Job& job) {
  std::size_t lo, hi;
  {
    std::lock_guard<std::mutex> lock(mutex_);
    if (job.fn == nullptr || job.next >= job.end) return false;
    lo = job.next;
    hi = std::min(job.end, lo + job.chunk);
    job.next = hi;
  }
  for (std::size_t i = lo; i < hi; ++i) (*job.fn)(i);
  bool last = false;
  {
    std::lock_guard<std::mutex> lock(mutex_);
    last = (--job.pending == 0);
  }
  if (last) cv_done_.notify_all();
  return true;
}

void ThreadPool::worker_loop() {
  uint64_t seen = 0;
  while (true) {
    {
      std::unique_lock<std::mutex> lock(mutex_);
      cv_work_.wait(lock, [this, seen] {
        return stop_ || (job_.fn != nullptr && job_.generation != seen &&
                         job_.next < job_.end);
      });
      if (stop_) return;
      seen = job_.generation;
    }
    while (run_one_chunk(job_)) {
    }
  }
}

}  // namespace gridloc
