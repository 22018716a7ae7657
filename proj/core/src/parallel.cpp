#include "parallel.hpp"

#include <atomic>
#include <condition_variable>
#include <cstdlib>
#include <mutex>
#include <thread>
#include <vector>

namespace psmnet::detail {

namespace {

int resolve_threads() {
  int hw = static_cast<int>(std::thread::hardware_concurrency());
  if (hw < 1) hw = 1;
  if (const char* env = std::getenv("PSMNET_THREADS")) {
    int cap = std::atoi(env);
    if (cap >= 1 && cap < hw) hw = cap;
    if (cap >= 1 && cap >= hw) hw = cap > 64 ? 64 : cap;
  }
  return hw;
}

// Minimal persistent pool: one resident worker per extra thread, woken per
// parallel_for call. The calling thread takes the first block itself.
class Pool {
 public:
  explicit Pool(int workers) : jobs_(workers) {
    for (int i = 0; i < workers; ++i) {
      threads_.emplace_back([this, i] { worker_loop(i); });
    }
  }

  ~Pool() {
    for (auto& job : jobs_) {
      std::lock_guard<std::mutex> lock(job.mutex);
      job.quit = true;
      job.cv.notify_one();
    }
    for (auto& t : threads_) t.join();
  }

  int workers() const { return static_cast<int>(threads_.size()); }

  void run(int64_t n, const std::function<void(int64_t)>& fn) {
    const int blocks = workers() + 1;
    pending_.store(workers(), std::memory_order_relaxed);
    for (int w = 0; w < workers(); ++w) {
      Job& job = jobs_[static_cast<size_t>(w)];
      std::lock_guard<std::mutex> lock(job.mutex);
      job.fn = &fn;
      job.begin = (w + 1) * n / blocks;
      job.end = (w + 2) * n / blocks;
      job.ready = true;
      job.cv.notify_one();
    }
    for (int64_t i = 0; i < n / blocks; ++i) fn(i);
    std::unique_lock<std::mutex> lock(done_mutex_);
    done_cv_.wait(lock, [this] { return pending_.load() == 0; });
  }

 private:
  struct Job {
    std::mutex mutex;
    std::condition_variable cv;
    const std::function<void(int64_t)>* fn = nullptr;
    int64_t begin = 0, end = 0;
    bool ready = false;
    bool quit = false;
  };

  void worker_loop(int index) {
    Job& job = jobs_[static_cast<size_t>(index)];
    for (;;) {
      const std::function<void(int64_t)>* fn = nullptr;
      int64_t begin = 0, end = 0;
      {
        std::unique_lock<std::mutex> lock(job.mutex);
        job.cv.wait(lock, [&job] { return job.ready || job.quit; });
        if (job.quit) return;
        fn = job.fn;
        begin = job.begin;
        end = job.end;
        job.ready = false;
      }
      for (int64_t i = begin; i < end; ++i) (*fn)(i);
      if (pending_.fetch_sub(1) == 1) {
        std::lock_guard<std::mutex> lock(done_mutex_);
        done_cv_.notify_one();
      }
    }
  }

  std::vector<Job> jobs_;
  std::vector<std::thread> threads_;
  std::atomic<int> pending_{0};
  std::mutex done_mutex_;
  std::condition_variable done_cv_;
};

Pool* pool_instance() {
  static int threads = resolve_threads();
  if (threads <= 1) return nullptr;
  static Pool pool(threads - 1);
  return &pool;
}

}  // namespace

int max_threads() {
  static int threads = resolve_threads();
  return threads;
}

void parallel_for(int64_t n, const std::function<void(int64_t)>& fn) {
  if (n <= 0) return;
  Pool* pool = pool_instance();
  if (!pool || n < 2) {
    for (int64_t i = 0; i < n; ++i) fn(i);
    return;
  }
  pool->run(n, fn);
}

}  // namespace psmnet::detail
