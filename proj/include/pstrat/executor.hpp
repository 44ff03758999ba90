#pragma once

#include "pstrat/distributions.hpp"

#include <Eigen/Core>

#include <condition_variable>
#include <cstddef>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace pstrat {

/// Runs `count` independent tasks. Implementations decide the threading.
class Executor {
public:
  virtual ~Executor() = default;
  virtual void run(std::size_t count, const std::function<void(std::size_t)>& task) = 0;
};

/// Runs tasks in order on the calling thread.
Executor& serial_executor();

/// Fixed-size pool; the calling thread takes part in every run().
class ThreadPool final : public Executor {
public:
  explicit ThreadPool(std::size_t threads);
  ~ThreadPool() override;
  ThreadPool(const ThreadPool&) = delete;
  ThreadPool& operator=(const ThreadPool&) = delete;

  void run(std::size_t count, const std::function<void(std::size_t)>& task) override;
  std::size_t size() const { return workers_.size() + 1; }

private:
  void worker_loop();
  void drain();

  std::vector<std::thread> workers_;
  std::mutex mutex_;
  std::condition_variable wake_;
  std::condition_variable done_;
  const std::function<void(std::size_t)>* task_ = nullptr;
  std::size_t count_ = 0;
  std::size_t next_ = 0;
  std::size_t finished_ = 0;
  std::size_t generation_ = 0;
  bool stop_ = false;
};

/// Units per random-stream block in per-unit Gibbs steps.
inline constexpr Eigen::Index kUnitBlock = 128;

/// Split units [0, n) into fixed blocks of kUnitBlock. Each block gets its own
/// stream derived from one draw of `rng`, so results are identical whatever
/// executor runs the blocks.
void for_unit_blocks(Eigen::Index n, RandomStream& rng, Executor& exec,
                     const std::function<void(Eigen::Index, Eigen::Index, RandomStream&)>& body);

} // namespace pstrat
