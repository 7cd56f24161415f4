#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "levyns/field.hpp"

namespace testutil {

inline levyns::SpectralField random_field(const levyns::BasisPtr& basis, std::mt19937_64& rng, std::size_t n = 0,
                                          double scale = 1.0) {
  std::normal_distribution<double> g(0.0, scale);
  levyns::SpectralField u(basis);
  const std::size_t active = n == 0 ? basis->size() : n;
  for (std::size_t i = 0; i < active; ++i) u[i] = g(rng);
  return u;
}

inline double rel_close(double a, double b) { return std::abs(a - b) / std::max(1.0, std::max(std::abs(a), std::abs(b))); }

}  // namespace testutil
