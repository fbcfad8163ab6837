#pragma once

#include <condition_variable>
#include <cstddef>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace gridloc {

// Persistent worker pool for index-parallel loops. Work items are disjoint
// index ranges, so results never depend on the number of workers.
class ThreadPool {
 public:
  explicit ThreadPool(int threads = 0);
  ~ThreadPool();

  ThreadPool(const ThreadPool&) = delete;
  ThreadPool& operator=(const ThreadPool&) = delete;

  int thread_count() const { return static_cast<int>(workers_.size()) + 1; }

  // Calls fn(i) for every i in [begin, end). Blocks until done. fn must not
  // write to any location another index writes to.
  void parallel_for(std::size_t begin, std::size_t end,
                    const std::function<void(std::size_t)>& fn);

 private:
  struct Job {
    const std::function<void(std::size_t)>* fn = nullptr;
    std::size_t begin = 0;
    std::size_t end = 0;
    std::size_t chunk = 1;
    std::size_t next = 0;     // guarded by mutex_
    std::size_t pending = 0;  // chunks not yet finished
    uint64_t generation = 0;
  };

  void worker_loop();
  bool run_one_chunk(Job& job);

  std::vector<std::thread> workers_;
  std::mutex mutex_;
  std::condition_variable cv_work_;
  std::condition_variable cv_done_;
  Job job_;
  bool stop_ = false;
};

}  // namespace gridloc
