#pragma once

// Data-parallel kernels. Every kernel has a serial reference in
// `kernels::serial` and an OpenMP version in `kernels::omp` with identical
// results; tests compare the two and tools/bench_kernels times them.

#include <cstddef>
#include <exception>
#include <span>

#include "levyns/basis.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace levyns::kernels {

int max_workers();
void set_workers(int workers);

namespace serial {

template <typename F>
void for_each_index(std::size_t count, F&& f) {
  for (std::size_t i = 0; i < count; ++i) f(i);
}

// Direct summation of sum_i a_i e_i(x) at arbitrary points.
// points: Q * d coordinates (point-major); out: d * Q values (component-major).
void synthesize_points(const BasisTable& table, std::span<const double> coeffs, std::span<const double> points,
                       std::span<double> out);

}  // namespace serial

namespace omp {

// Each index is independent; results must not depend on scheduling.
template <typename F>
void for_each_index(std::size_t count, F&& f) {
#ifdef _OPENMP
  std::exception_ptr error;
  const auto n = static_cast<long long>(count);
#pragma omp parallel for schedule(dynamic, 1)
  for (long long i = 0; i < n; ++i) {
    try {
      f(static_cast<std::size_t>(i));
    } catch (...) {
#pragma omp critical(levyns_kernel_error)
      if (!error) error = std::current_exception();
    }
  }
  if (error) std::rethrow_exception(error);
#else
  serial::for_each_index(count, f);
#endif
}

void synthesize_points(const BasisTable& table, std::span<const double> coeffs, std::span<const double> points,
                       std::span<double> out);

}  // namespace omp

}  // namespace levyns::kernels
