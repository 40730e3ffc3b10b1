#include "splatstyle/parallel.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace splatstyle {

namespace {
Exec g_default_exec = Exec::Parallel;
}

void set_worker_count(int n) {
#ifdef _OPENMP
  if (n >= 1) omp_set_num_threads(n);
#else
  (void)n;
#endif
}

int worker_count() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

void set_default_exec(Exec exec) { g_default_exec = exec; }
Exec default_exec() { return g_default_exec; }

namespace detail {

void omp_for_static(std::ptrdiff_t n, void* ctx, void (*body)(void*, std::ptrdiff_t)) {
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) body(ctx, i);
#else
  for (std::ptrdiff_t i = 0; i < n; ++i) body(ctx, i);
#endif
}

void omp_for_dynamic(std::ptrdiff_t n, void* ctx, void (*body)(void*, std::ptrdiff_t)) {
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic, 1)
  for (std::ptrdiff_t i = 0; i < n; ++i) body(ctx, i);
#else
  for (std::ptrdiff_t i = 0; i < n; ++i) body(ctx, i);
#endif
}

}  // namespace detail

}  // namespace splatstyle
