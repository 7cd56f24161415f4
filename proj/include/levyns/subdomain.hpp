#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include "levyns/basis.hpp"
#include "levyns/path.hpp"

namespace levyns {

struct Box {
  std::array<double, kMaxDim> lo{};
  std::array<double, kMaxDim> hi{};
};

// Nested axis-aligned boxes O_1 c O_2 c ... c O_Rmax = [0, 2pi)^d, each with
// a quadrature resolution (points per axis).
class SubdomainFamily {
 public:
  SubdomainFamily(int dim, std::vector<Box> boxes, std::vector<int> points_per_axis);

  // Boxes centred at (pi, ..., pi) with half-width pi * R / Rmax.
  static SubdomainFamily centered(int dim, std::size_t count, int points_per_axis);

  int dim() const { return dim_; }
  std::size_t size() const { return boxes_.size(); }
  const Box& box(std::size_t R) const { return boxes_.at(R - 1); }
  int resolution(std::size_t R) const { return points_.at(R - 1); }
  bool is_full(std::size_t R) const;

 private:
  int dim_;
  std::vector<Box> boxes_;
  std::vector<int> points_;
};

// p_{T,R}(u) = ( int_0^T int_{O_R} |u(t,x)|^q dx dt )^{1/q}, dx normalized by (2pi)^d.
// R is 1-based. Space: periodic trapezoid on the full box, tensor Gauss-Legendre
// on proper sub-boxes. Time: Gauss-Legendre on each inter-record interval.
double local_seminorm(const CadlagPath& path, const SubdomainFamily& family, std::size_t R, double q,
                      int time_nodes = 3);

}  // namespace levyns
