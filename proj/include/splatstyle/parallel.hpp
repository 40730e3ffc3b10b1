#pragma once

#include <cstddef>

namespace splatstyle {

// Execution policy for the hot kernels. Serial is the reference path; the
// parallel path must produce bit-identical results, so every reduction runs
// in a fixed, input-independent order (rows owned by one thread, chunk merges
// in chunk-index order).
enum class Exec { Serial, Parallel };

void set_worker_count(int n);
int worker_count();

void set_default_exec(Exec exec);
Exec default_exec();

namespace detail {
void omp_for_static(std::ptrdiff_t n, void* ctx, void (*body)(void*, std::ptrdiff_t));
void omp_for_dynamic(std::ptrdiff_t n, void* ctx, void (*body)(void*, std::ptrdiff_t));
}  // namespace detail

// Uniform-cost loop, static schedule.
template <typename F>
void parallel_for(std::ptrdiff_t n, Exec exec, F&& body) {
  if (exec == Exec::Parallel) {
    detail::omp_for_static(n, &body, [](void* ctx, std::ptrdiff_t i) { (*static_cast<F*>(ctx))(i); });
  } else {
    for (std::ptrdiff_t i = 0; i < n; ++i) body(i);
  }
}

// Uneven-cost loop (per-cluster tasks), dynamic schedule.
template <typename F>
void parallel_for_dynamic(std::ptrdiff_t n, Exec exec, F&& body) {
  if (exec == Exec::Parallel) {
    detail::omp_for_dynamic(n, &body, [](void* ctx, std::ptrdiff_t i) { (*static_cast<F*>(ctx))(i); });
  } else {
    for (std::ptrdiff_t i = 0; i < n; ++i) body(i);
  }
}

}  // namespace splatstyle
