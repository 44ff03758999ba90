#include "pstrat/executor.hpp"

#include <algorithm>

namespace pstrat {

namespace {

class SerialExecutor final : public Executor {
public:
  void run(std::size_t count, const std::function<void(std::size_t)>& task) override {
    for (std::size_t k = 0; k < count; ++k) task(k);
  }
};

} // namespace

Executor& serial_executor() {
  static SerialExecutor exec;
  return exec;
}

ThreadPool::ThreadPool(std::size_t threads) {
  const std::size_t extra = threads > 1 ? threads - 1 : 0;
  workers_.reserve(extra);
  for (std::size_t k = 0; k < extra; ++k) workers_.emplace_back([this] { worker_loop(); });
}

ThreadPool::~ThreadPool() {
  {
    std::lock_guard lock(mutex_);
    stop_ = true;
  }
  wake_.notify_all();
  for (auto& w : workers_) w.join();
}

void ThreadPool::drain() {
  // Called with mutex_ held; releases it while running tasks.
  std::unique_lock lock(mutex_, std::adopt_lock);
  while (next_ < count_) {
    const std::size_t k = next_++;
    const auto* task = task_;
    lock.unlock();
    (*task)(k);
    lock.lock();
    if (++finished_ == count_) done_.notify_all();
  }
  lock.release();
}

void ThreadPool::worker_loop() {
  std::size_t seen = 0;
  std::unique_lock lock(mutex_);
  for (;;) {
    wake_.wait(lock, [&] { return stop_ || generation_ != seen; });
    if (stop_) return;
    seen = generation_;
    lock.release();
    drain();
    lock = std::unique_lock(mutex_, std::adopt_lock);
  }
}

void ThreadPool::run(std::size_t count, const std::function<void(std::size_t)>& task) {
  if (count == 0) return;
  if (workers_.empty() || count == 1) {
    for (std::size_t k = 0; k < count; ++k) task(k);
    return;
  }
  std::unique_lock lock(mutex_);
  task_ = &task;
  count_ = count;
  next_ = 0;
  finished_ = 0;
  ++generation_;
  wake_.notify_all();
  lock.release();
  drain();
  lock = std::unique_lock(mutex_, std::adopt_lock);
  done_.wait(lock, [&] { return finished_ == count_; });
  task_ = nullptr;
}

void for_unit_blocks(Eigen::Index n, RandomStream& rng, Executor& exec,
                     const std::function<void(Eigen::Index, Eigen::Index, RandomStream&)>& body) {
  const std::uint64_t key = rng.next_u64();
  const auto blocks = static_cast<std::size_t>((n + kUnitBlock - 1) / kUnitBlock);
  exec.run(blocks, [&](std::size_t b) {
    RandomStream block_rng(derive_seed(key, b));
    const Eigen::Index begin = static_cast<Eigen::Index>(b) * kUnitBlock;
    body(begin, std::min(n, begin + kUnitBlock), block_rng);
  });
}

} // namespace pstrat
