#pragma once

#include <cstddef>
#include <exception>
#include <mutex>

#include <omp.h>

namespace lbvh {

// Every kernel has a serial reference path and an OpenMP path. Both must
// produce identical output; the serial one is what the tests trust.
enum class Execution { serial, parallel };

namespace detail {

// Runs body(i) for i in [0, count). Exceptions thrown inside the OpenMP
// region are captured and the first one is rethrown on the calling thread.
template <typename Body>
void for_each_index(Execution exec, std::size_t count, Body&& body,
                    std::size_t chunk = 1024) {
  if (exec == Execution::serial || count < 2) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::exception_ptr error;
  std::mutex error_mutex;
  const auto n = static_cast<std::ptrdiff_t>(count);
  const auto c = static_cast<int>(chunk);
#pragma omp parallel for schedule(dynamic, c)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    try {
      body(static_cast<std::size_t>(i));
    } catch (...) {
      std::lock_guard lock(error_mutex);
      if (!error) error = std::current_exception();
    }
  }
  if (error) std::rethrow_exception(error);
}

}  // namespace detail
}  // namespace lbvh
