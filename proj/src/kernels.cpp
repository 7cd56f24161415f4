#include "levyns/kernels.hpp"

#include <cmath>

namespace levyns::kernels {

int max_workers() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

void set_workers(int workers) {
#ifdef _OPENMP
  if (workers > 0) omp_set_num_threads(workers);
#else
  (void)workers;
#endif
}

namespace {

inline void synthesize_point(const BasisTable& table, std::span<const double> coeffs, const double* x,
                             std::size_t q, std::size_t npts, double* out) {
  const int d = table.dim();
  double acc[kMaxDim] = {0.0, 0.0, 0.0};
  const double root2 = std::sqrt(2.0);
  for (std::size_t i = 0; i < coeffs.size(); ++i) {
    const double a = coeffs[i];
    if (a == 0.0) continue;
    const Mode& mode = table.mode(i);
    double phase = 0.0;
    for (int c = 0; c < d; ++c) phase += mode.k.k[c] * x[c];
    const double phi = root2 * a * (mode.parity == Parity::cosine ? std::cos(phase) : std::sin(phase));
    for (int c = 0; c < d; ++c) acc[c] += phi * mode.unit_polarization[c];
  }
  for (int c = 0; c < d; ++c) out[static_cast<std::size_t>(c) * npts + q] = acc[c];
}

}  // namespace

namespace serial {

void synthesize_points(const BasisTable& table, std::span<const double> coeffs, std::span<const double> points,
                       std::span<double> out) {
  const auto d = static_cast<std::size_t>(table.dim());
  const std::size_t npts = points.size() / d;
  for (std::size_t q = 0; q < npts; ++q) synthesize_point(table, coeffs, points.data() + q * d, q, npts, out.data());
}

}  // namespace serial

namespace omp {

void synthesize_points(const BasisTable& table, std::span<const double> coeffs, std::span<const double> points,
                       std::span<double> out) {
  const auto d = static_cast<std::size_t>(table.dim());
  const auto npts = static_cast<long long>(points.size() / d);
#pragma omp parallel for schedule(static)
  for (long long q = 0; q < npts; ++q) {
    synthesize_point(table, coeffs, points.data() + static_cast<std::size_t>(q) * d, static_cast<std::size_t>(q),
                     static_cast<std::size_t>(npts), out.data());
  }
}

}  // namespace omp

}  // namespace levyns::kernels
