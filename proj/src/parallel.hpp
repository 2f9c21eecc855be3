#pragma once

#include <exception>
#include <mutex>

namespace twistray::detail {

/// fn(i) for i in [0, n), across OpenMP threads when available. The first
/// exception thrown by any iteration is rethrown on the calling thread.
template <typename Fn>
void for_each_parallel(long n, Fn&& fn) {
  std::exception_ptr failure;
  std::mutex guard;
#pragma omp parallel for schedule(dynamic)
  for (long i = 0; i < n; ++i) {
    try {
      fn(i);
    } catch (...) {
      std::lock_guard<std::mutex> lock(guard);
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
}

}  // namespace twistray::detail
