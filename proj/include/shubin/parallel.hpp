#ifndef SHUBIN_PARALLEL_HPP
#define SHUBIN_PARALLEL_HPP

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace shubin {

namespace detail {
inline std::atomic<int>& thread_setting() {
  static std::atomic<int> threads{1};
  return threads;
}
}  // namespace detail

// Number of worker threads used by the compute kernels. Results never depend
// on this value: work is split into fixed chunks and reduced in chunk order.
inline int thread_count() { return detail::thread_setting().load(); }

inline void set_thread_count(int n) {
  if (n <= 0) n = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  detail::thread_setting().store(n);
}

// Calls f(i) for every i in [begin, end). Each index is visited exactly once;
// callers must not share mutable state between indices. The first exception
// thrown by any worker is rethrown on the calling thread.
template <class F>
void parallel_for(std::size_t begin, std::size_t end, F&& f) {
  if (end <= begin) return;
  const std::size_t count = end - begin;
  const std::size_t workers =
      std::min<std::size_t>(static_cast<std::size_t>(thread_count()), count);
  if (workers <= 1) {
    for (std::size_t i = begin; i < end; ++i) f(i);
    return;
  }
  std::atomic<std::size_t> next{begin};
  std::exception_ptr error;
  std::mutex error_mutex;
  {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        try {
          for (std::size_t i = next++; i < end; i = next++) f(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
          next = end;  // stop handing out work
        }
      });
    }
  }
  if (error) std::rethrow_exception(error);
}

}  // namespace shubin

#endif  // SHUBIN_PARALLEL_HPP
