#pragma once

#include <cstddef>

#ifdef HOTSPOT_HAVE_OPENMP
#include <omp.h>
#endif

namespace hotspot {

// Static-schedule parallel loop. Bodies must write only to slot `i` of their
// outputs; reductions happen afterwards in index order, which keeps results
// independent of the thread count.
template <typename Body>
void parallel_for(std::size_t n, Body&& body) {
#ifdef HOTSPOT_HAVE_OPENMP
  const long long count = static_cast<long long>(n);
#pragma omp parallel for schedule(static)
  for (long long i = 0; i < count; ++i) body(static_cast<std::size_t>(i));
#else
  for (std::size_t i = 0; i < n; ++i) body(i);
#endif
}

inline int max_threads() {
#ifdef HOTSPOT_HAVE_OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

inline void set_threads(int n) {
#ifdef HOTSPOT_HAVE_OPENMP
  if (n > 0) omp_set_num_threads(n);
#else
  (void)n;
#endif
}

}  // namespace hotspot
