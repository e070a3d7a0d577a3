#pragma once

#include <cstddef>
#include <exception>

namespace lace {

/// Runs f(i) for i in [0, n) on the OpenMP team. An exception thrown by any
/// iteration is rethrown on the calling thread after the loop.
template <typename F>
void parallel_for(std::ptrdiff_t n, F&& f) {
  std::exception_ptr error;
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    try {
      f(i);
    } catch (...) {
#pragma omp critical(lace_parallel_error)
      if (!error) error = std::current_exception();
    }
  }
  if (error) std::rethrow_exception(error);
}

}  // namespace lace
