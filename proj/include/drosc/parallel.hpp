#pragma once

#include <cstddef>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace drosc {

// Runs fn(i) for i in [0, n). threads <= 1 selects the serial reference path;
// threads == 0 uses the OpenMP default. Results must not depend on iteration
// order: every call site writes to a slot indexed by i.
template <typename Fn>
void parallel_for(std::size_t n, int threads, Fn&& fn) {
#ifdef _OPENMP
  if (threads != 1) {
    if (threads > 1) {
#pragma omp parallel for schedule(static) num_threads(threads)
      for (long long i = 0; i < static_cast<long long>(n); ++i) {
        fn(static_cast<std::size_t>(i));
      }
    } else {
#pragma omp parallel for schedule(static)
      for (long long i = 0; i < static_cast<long long>(n); ++i) {
        fn(static_cast<std::size_t>(i));
      }
    }
    return;
  }
#else
  (void)threads;
#endif
  for (std::size_t i = 0; i < n; ++i) {
    fn(i);
  }
}

inline int hardware_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

}  // namespace drosc
