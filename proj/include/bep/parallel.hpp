#pragma once

#include <algorithm>
#include <cstdlib>
#include <exception>
#include <string>
#include <thread>
#include <vector>

namespace bep {

/// Worker count: BEP_THREADS if set to a positive integer, else the hardware concurrency.
inline std::size_t thread_count() {
  if (const char* env = std::getenv("BEP_THREADS")) {
    try {
      long v = std::stol(env);
      if (v > 0) return static_cast<std::size_t>(v);
    } catch (const std::exception&) {
    }
  }
  return std::max<std::size_t>(1, std::thread::hardware_concurrency());
}

/// out[i] = fn(i) for i < count. Each element is computed independently, so the
/// result does not depend on the number of workers.
template <typename Fn>
auto parallel_map(std::size_t count, Fn&& fn, std::size_t workers = thread_count()) {
  using T = decltype(fn(std::size_t{}));
  std::vector<T> out(count);
  workers = std::min(workers, count);
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) out[i] = fn(i);
    return out;
  }
  std::vector<std::exception_ptr> errors(workers);
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t i = w; i < count; i += workers) out[i] = fn(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

}  // namespace bep
