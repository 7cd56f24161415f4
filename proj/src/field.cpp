#include "levyns/field.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include "levyns/error.hpp"

namespace levyns {

SpectralField::SpectralField(BasisPtr basis, bool dual)
    : basis_(std::move(basis)), coeffs_(basis_ ? basis_->size() : 0, 0.0), dual_(dual) {}

SpectralField::SpectralField(BasisPtr basis, std::vector<double> coeffs, bool dual)
    : basis_(std::move(basis)), coeffs_(std::move(coeffs)), dual_(dual) {
  if (!basis_ || coeffs_.size() != basis_->size()) {
    throw DomainError("SpectralField: coefficient count does not match basis size");
  }
}

SpectralField SpectralField::unit(BasisPtr basis, std::size_t index) {
  SpectralField f(std::move(basis));
  f.coeffs_.at(index) = 1.0;
  return f;
}

std::size_t SpectralField::support() const {
  std::size_t n = coeffs_.size();
  while (n > 0 && coeffs_[n - 1] == 0.0) --n;
  return n;
}

namespace {

void check_compatible(const SpectralField& a, const SpectralField& b) {
  if (a.basis() != b.basis()) throw DomainError("fields live on different bases");
  if (a.is_dual() != b.is_dual()) throw DomainError("cannot combine primal and dual fields");
}

void require_primal(const SpectralField& u, const char* what) {
  if (u.is_dual()) throw DomainError(std::string(what) + ": dual element, use the dual norm");
}

}  // namespace

SpectralField& SpectralField::operator+=(const SpectralField& o) {
  check_compatible(*this, o);
  for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] += o.coeffs_[i];
  return *this;
}

SpectralField& SpectralField::operator-=(const SpectralField& o) {
  check_compatible(*this, o);
  for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] -= o.coeffs_[i];
  return *this;
}

SpectralField& SpectralField::operator*=(double s) {
  for (double& c : coeffs_) c *= s;
  return *this;
}

SpectralField operator+(SpectralField a, const SpectralField& b) { return a += b; }
SpectralField operator-(SpectralField a, const SpectralField& b) { return a -= b; }
SpectralField operator*(double s, SpectralField a) { return a *= s; }

double squared_sum(std::span<const double> a) {
  double s = 0.0;
  for (double x : a) s += x * x;
  return s;
}

double weighted_squared_sum(std::span<const double> a, std::span<const double> w) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += w[i] * a[i] * a[i];
  return s;
}

double l2_norm(std::span<const double> a) {
  double scale = 0.0;
  for (double x : a) scale = std::max(scale, std::abs(x));
  if (scale == 0.0 || !std::isfinite(scale)) return scale;
  double s = 0.0;
  for (double x : a) s += (x / scale) * (x / scale);
  return scale * std::sqrt(s);
}

double norm_H(const SpectralField& u) {
  require_primal(u, "norm_H");
  return std::sqrt(squared_sum(u.coeffs()));
}

double seminorm_grad(const SpectralField& u) {
  require_primal(u, "seminorm_grad");
  return std::sqrt(weighted_squared_sum(u.coeffs(), u.table().eigenvalues()));
}

double norm_V(const SpectralField& u) {
  require_primal(u, "norm_V");
  // Same accumulation as the two parts so that V^2 - H^2 - grad^2 vanishes.
  return std::sqrt(squared_sum(u.coeffs()) + weighted_squared_sum(u.coeffs(), u.table().eigenvalues()));
}

double norm_Vm(const SpectralField& u, double m) {
  require_primal(u, "norm_Vm");
  const auto lambda = u.table().eigenvalues();
  double s = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) s += std::pow(1.0 + lambda[i], m) * u[i] * u[i];
  return std::sqrt(s);
}

double norm_Vm(const SpectralField& u) {
  require_primal(u, "norm_Vm");
  const auto w = u.table().vm_norms();
  double s = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) s += (w[i] * u[i]) * (w[i] * u[i]);
  return std::sqrt(s);
}

double norm_U(const SpectralField& u) {
  require_primal(u, "norm_U");
  const auto r = u.table().u_radii();
  double s = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    if (u[i] == 0.0) continue;
    const double q = u[i] / r[i];
    s += q * q;
  }
  return std::sqrt(s);
}

double dual_norm_V(const SpectralField& x) {
  const auto lambda = x.table().eigenvalues();
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * x[i] / (1.0 + lambda[i]);
  return std::sqrt(s);
}

double dual_norm_Vm(const SpectralField& x) {
  const auto w = x.table().vm_norms();
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double q = x[i] / w[i];
    s += q * q;
  }
  return std::sqrt(s);
}

double norm_Uprime(const SpectralField& x) {
  const auto r = x.table().u_radii();
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += (r[i] * x[i]) * (r[i] * x[i]);
  return std::sqrt(s);
}

double inner(const SpectralField& x, const SpectralField& v) {
  if (x.basis() != v.basis()) throw DomainError("inner: fields live on different bases");
  if (v.is_dual()) throw DomainError("inner: second argument must be primal");
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * v[i];
  return s;
}

SpectralField project_Pn(const SpectralField& x, std::size_t n) {
  if (n < 1 || n > x.size()) throw DomainError("project_Pn: n must lie in [1, N]");
  SpectralField out = x;
  for (std::size_t i = n; i < out.size(); ++i) out[i] = 0.0;
  return out;
}

}  // namespace levyns
