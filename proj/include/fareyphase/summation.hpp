#ifndef FAREYPHASE_SUMMATION_HPP
#define FAREYPHASE_SUMMATION_HPP

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace fareyphase {

/// Neumaier-compensated accumulator. Merging two accumulators keeps both
/// compensation terms, so an ordered merge of chunk sums is as accurate as
/// one long serial pass.
class compensated_sum {
public:
  constexpr compensated_sum() = default;
  constexpr explicit compensated_sum(double v) : sum_(v) {}

  constexpr void add(double x) noexcept {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x))
      comp_ += (sum_ - t) + x;
    else
      comp_ += (x - t) + sum_;
    sum_ = t;
  }

  constexpr compensated_sum& operator+=(double x) noexcept {
    add(x);
    return *this;
  }

  constexpr void merge(const compensated_sum& other) noexcept {
    add(other.sum_);
    comp_ += other.comp_;
  }

  constexpr double value() const noexcept { return sum_ + comp_; }

private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

inline unsigned default_thread_count() noexcept {
  const unsigned n = std::thread::hardware_concurrency();
  return n == 0 ? 1u : n;
}

/// Runs task(i) for every i in [0, count) on up to `threads` workers.
/// Tasks write to caller-owned slots indexed by i, so the result never
/// depends on scheduling. The first exception thrown by a task is rethrown.
template <class Task>
void parallel_for_index(std::size_t count, unsigned threads, Task&& task) {
  if (count == 0)
    return;
  const std::size_t workers = std::min<std::size_t>(std::max(1u, threads), count);
  if (workers == 1) {
    for (std::size_t i = 0; i < count; ++i)
      task(i);
    return;
  }

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1, std::memory_order_relaxed);
      if (i >= count)
        return;
      try {
        task(i);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure)
          failure = std::current_exception();
        next.store(count);
        return;
      }
    }
  };

  std::vector<std::thread> pool;
  pool.reserve(workers - 1);
  for (std::size_t w = 1; w < workers; ++w)
    pool.emplace_back(worker);
  worker();
  for (auto& t : pool)
    t.join();
  if (failure)
    std::rethrow_exception(failure);
}

} // namespace fareyphase

#endif
