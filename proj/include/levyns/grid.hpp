#pragma once

#include <complex>
#include <cstddef>
#include <memory>
#include <span>
#include <vector>

#include "levyns/basis.hpp"
#include "levyns/field.hpp"

namespace levyns {

// Velocity samples on a uniform periodic grid, stored component-major:
// value(c, p) = data[c * points + p].
struct GridSamples {
  int dim = 2;
  int per_axis = 0;
  std::size_t points = 0;
  std::vector<double> data;

  std::span<const double> component(int c) const { return {data.data() + c * points, points}; }
};

// Uniform M^d grid on [0, 2pi)^d with FFT synthesis/analysis for the first
// `active` basis modes. Owns its FFT buffers and plans; one grid per worker.
class SpectralGrid {
 public:
  SpectralGrid(BasisPtr basis, std::size_t active, int per_axis);
  ~SpectralGrid();
  SpectralGrid(SpectralGrid&&) noexcept;
  SpectralGrid& operator=(SpectralGrid&&) noexcept;
  SpectralGrid(const SpectralGrid&) = delete;
  SpectralGrid& operator=(const SpectralGrid&) = delete;

  // Grid that integrates triple products of active modes exactly (2/3 rule):
  // smallest FFT-friendly M >= 3K + 1 with K the largest active |k|_inf.
  static SpectralGrid dealiased(BasisPtr basis, std::size_t active);
  static int dealiased_size(int max_wavenumber);

  const BasisTable& table() const { return *basis_; }
  const BasisPtr& basis() const { return basis_; }
  std::size_t active() const { return active_; }
  int per_axis() const { return per_axis_; }
  std::size_t points() const { return points_; }
  int dim() const { return basis_->dim(); }
  bool resolves_triads() const;

  void point(std::size_t p, std::span<double> x) const;

  // out: d * points values (component-major).
  void synthesize(std::span<const double> coeffs, std::span<double> out);
  // out: d * d * points values; block (c * d + j) holds d u_c / d x_j.
  void synthesize_gradient(std::span<const double> coeffs, std::span<double> out);
  // Quadrature pairings <f, e_i> (normalized measure) for the active modes.
  void analyze(std::span<const double> field, std::span<double> dual_out);

 private:
  struct Impl;
  BasisPtr basis_;
  std::size_t active_ = 0;
  int per_axis_ = 0;
  std::size_t points_ = 0;
  std::unique_ptr<Impl> impl_;
};

// Physical samples of a primal field; grid must have >= 2 n_max + 1 points per axis.
GridSamples evaluate_on_grid(const SpectralField& u, int per_axis);
// Inverse of evaluate_on_grid for fields in the span of the basis.
SpectralField coefficients_from_grid(const BasisPtr& basis, const GridSamples& samples);
// Pointwise divergence computed spectrally and evaluated on the grid.
std::vector<double> divergence_on_grid(const SpectralField& u, int per_axis);

}  // namespace levyns
