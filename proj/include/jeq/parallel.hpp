#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <cstdlib>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace jeq {

// Applies the JEQ_THREADS cap (if set) to the OpenMP runtime. Call once at
// process start; safe to call again.
inline void init_threads_from_env() {
#ifdef _OPENMP
  if (const char* s = std::getenv("JEQ_THREADS")) {
    int t = std::atoi(s);
    if (t >= 1) omp_set_num_threads(t);
  }
#endif
}

inline int max_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

template <class F>
inline void parallel_for(std::size_t count, F&& body) {
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
  for (long long i = 0; i < (long long)count; ++i) body((std::size_t)i);
#else
  for (std::size_t i = 0; i < count; ++i) body(i);
#endif
}

namespace detail {
constexpr std::size_t kReduceChunk = 4096;
}

// Sum with a fixed association order: each 4096-element chunk is summed left
// to right, then chunk partials are combined in index order. The result is
// bit-identical for any thread count.
template <class F>
inline double deterministic_sum(std::size_t count, F&& term) {
  const std::size_t nchunk = (count + detail::kReduceChunk - 1) / detail::kReduceChunk;
  std::vector<double> partial(nchunk, 0.0);
  parallel_for(nchunk, [&](std::size_t c) {
    const std::size_t lo = c * detail::kReduceChunk;
    const std::size_t hi = std::min(count, lo + detail::kReduceChunk);
    double s = 0.0;
    for (std::size_t i = lo; i < hi; ++i) s += term(i);
    partial[c] = s;
  });
  double s = 0.0;
  for (double p : partial) s += p;
  return s;
}

// Max is exact under any association, but the same chunked scheme keeps the
// traversal order fixed.
template <class F>
inline double deterministic_max(std::size_t count, F&& term) {
  const std::size_t nchunk = (count + detail::kReduceChunk - 1) / detail::kReduceChunk;
  std::vector<double> partial(nchunk);
  parallel_for(nchunk, [&](std::size_t c) {
    const std::size_t lo = c * detail::kReduceChunk;
    const std::size_t hi = std::min(count, lo + detail::kReduceChunk);
    double m = term(lo);
    for (std::size_t i = lo + 1; i < hi; ++i) m = std::max(m, term(i));
    partial[c] = m;
  });
  double m = partial[0];
  for (double p : partial) m = std::max(m, p);
  return m;
}

template <class F>
inline double deterministic_min(std::size_t count, F&& term) {
  return -deterministic_max(count, [&](std::size_t i) { return -term(i); });
}

}  // namespace jeq
