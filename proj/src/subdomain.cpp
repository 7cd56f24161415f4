#include "levyns/subdomain.hpp"

#include <cmath>
#include <numbers>
#include <utility>

#include "levyns/error.hpp"
#include "levyns/kernels.hpp"
#include "levyns/quadrature.hpp"

namespace levyns {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
}

SubdomainFamily::SubdomainFamily(int dim, std::vector<Box> boxes, std::vector<int> points_per_axis)
    : dim_(dim), boxes_(std::move(boxes)), points_(std::move(points_per_axis)) {
  if (dim_ != 2 && dim_ != 3) throw DomainError("SubdomainFamily: dimension must be 2 or 3");
  if (boxes_.empty() || boxes_.size() != points_.size()) {
    throw DomainError("SubdomainFamily: need one resolution per box");
  }
  for (std::size_t R = 0; R < boxes_.size(); ++R) {
    for (int c = 0; c < dim_; ++c) {
      if (!(boxes_[R].lo[c] < boxes_[R].hi[c]) || boxes_[R].lo[c] < 0.0 || boxes_[R].hi[c] > kTwoPi) {
        throw DomainError("SubdomainFamily: box outside [0, 2pi)^d or empty");
      }
      if (R > 0 && !(boxes_[R].lo[c] < boxes_[R - 1].lo[c] || boxes_[R].hi[c] > boxes_[R - 1].hi[c])) {
        // strict nesting requires growth along every axis unless already full
        if (!(boxes_[R - 1].lo[c] == 0.0 && boxes_[R - 1].hi[c] == kTwoPi)) {
          throw DomainError("SubdomainFamily: boxes must be strictly nested");
        }
      }
      if (R > 0 && (boxes_[R].lo[c] > boxes_[R - 1].lo[c] || boxes_[R].hi[c] < boxes_[R - 1].hi[c])) {
        throw DomainError("SubdomainFamily: boxes must be nested");
      }
    }
  }
  if (!is_full(boxes_.size())) throw DomainError("SubdomainFamily: the last box must be the full periodic box");
}

SubdomainFamily SubdomainFamily::centered(int dim, std::size_t count, int points_per_axis) {
  std::vector<Box> boxes;
  for (std::size_t R = 1; R <= count; ++R) {
    Box b;
    const double half = std::numbers::pi * static_cast<double>(R) / static_cast<double>(count);
    for (int c = 0; c < dim; ++c) {
      b.lo[c] = R == count ? 0.0 : std::numbers::pi - half;
      b.hi[c] = R == count ? kTwoPi : std::numbers::pi + half;
    }
    boxes.push_back(b);
  }
  return SubdomainFamily(dim, std::move(boxes), std::vector<int>(count, points_per_axis));
}

bool SubdomainFamily::is_full(std::size_t R) const {
  const Box& b = box(R);
  for (int c = 0; c < dim_; ++c) {
    if (b.lo[c] != 0.0 || b.hi[c] != kTwoPi) return false;
  }
  return true;
}

double local_seminorm(const CadlagPath& path, const SubdomainFamily& family, std::size_t R, double q,
                      int time_nodes) {
  if (!(q > 1.0) || !std::isfinite(q)) throw DomainError("local_seminorm: q must lie in (1, inf)");
  if (R < 1 || R > family.size()) throw DomainError("local_seminorm: subdomain index out of range");
  const BasisTable& table = *path.basis();
  const int d = table.dim();
  if (family.dim() != d) throw DomainError("local_seminorm: dimension mismatch");
  const int per_axis = family.resolution(R);
  const int kmax = table.max_wavenumber(path.level());
  if (per_axis < 2 * kmax + 1) {
    throw DomainError("local_seminorm: quadrature grid under-resolved (points per axis < 2 n_max + 1)");
  }

  // Tensor quadrature nodes with weights normalized by the box volume (2pi)^d.
  std::vector<std::vector<double>> ax_nodes(d), ax_weights(d);
  const Box& box = family.box(R);
  for (int c = 0; c < d; ++c) {
    if (family.is_full(R)) {
      for (int i = 0; i < per_axis; ++i) {
        ax_nodes[c].push_back(kTwoPi * i / per_axis);
        ax_weights[c].push_back(1.0 / per_axis);
      }
    } else {
      const QuadratureRule rule = gauss_legendre(per_axis, box.lo[c], box.hi[c]);
      ax_nodes[c] = rule.nodes;
      for (double w : rule.weights) ax_weights[c].push_back(w / kTwoPi);
    }
  }
  std::size_t npts = 1;
  for (int c = 0; c < d; ++c) npts *= ax_nodes[c].size();
  std::vector<double> points(npts * static_cast<std::size_t>(d));
  std::vector<double> weights(npts);
  for (std::size_t p = 0; p < npts; ++p) {
    std::size_t rest = p;
    double w = 1.0;
    for (int c = d - 1; c >= 0; --c) {
      const std::size_t i = rest % ax_nodes[c].size();
      rest /= ax_nodes[c].size();
      points[p * d + c] = ax_nodes[c][i];
      w *= ax_weights[c][i];
    }
    weights[p] = w;
  }

  std::vector<double> coeffs(table.size(), 0.0);
  std::vector<double> values(static_cast<std::size_t>(d) * npts);
  auto spatial = [&](std::span<const double> state) {
    std::copy(state.begin(), state.end(), coeffs.begin());
    kernels::omp::synthesize_points(table, coeffs, points, values);
    double s = 0.0;
    for (std::size_t p = 0; p < npts; ++p) {
      double mag2 = 0.0;
      for (int c = 0; c < d; ++c) mag2 += values[c * npts + p] * values[c * npts + p];
      s += weights[p] * std::pow(mag2, q / 2.0);
    }
    return s;
  };
  return std::pow(path.integrate(spatial, time_nodes), 1.0 / q);
}

}  // namespace levyns
