#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "levyns/basis.hpp"

namespace levyns {

// Coefficients against the basis e_1..e_N. A primal field is the element
// sum a_i e_i of H; a dual field stores the pairings <x, e_i> of an element of
// U', V_m' or V'.
class SpectralField {
 public:
  SpectralField() = default;
  explicit SpectralField(BasisPtr basis, bool dual = false);
  SpectralField(BasisPtr basis, std::vector<double> coeffs, bool dual = false);

  static SpectralField unit(BasisPtr basis, std::size_t index);

  const BasisPtr& basis() const { return basis_; }
  const BasisTable& table() const { return *basis_; }
  bool is_dual() const { return dual_; }
  std::size_t size() const { return coeffs_.size(); }

  std::span<double> coeffs() { return coeffs_; }
  std::span<const double> coeffs() const { return coeffs_; }
  double& operator[](std::size_t i) { return coeffs_[i]; }
  double operator[](std::size_t i) const { return coeffs_[i]; }

  // Index one past the last nonzero coefficient.
  std::size_t support() const;

  SpectralField& operator+=(const SpectralField& o);
  SpectralField& operator-=(const SpectralField& o);
  SpectralField& operator*=(double s);

 private:
  BasisPtr basis_;
  std::vector<double> coeffs_;
  bool dual_ = false;
};

SpectralField operator+(SpectralField a, const SpectralField& b);
SpectralField operator-(SpectralField a, const SpectralField& b);
SpectralField operator*(double s, SpectralField a);

// Primal norms; throw DomainError on dual input.
double norm_H(const SpectralField& u);
double seminorm_grad(const SpectralField& u);
double norm_V(const SpectralField& u);
double norm_Vm(const SpectralField& u, double m);
double norm_Vm(const SpectralField& u);
double norm_U(const SpectralField& u);

// Dual norms. Primal input is read through the Riesz identification of H.
double dual_norm_V(const SpectralField& x);
double dual_norm_Vm(const SpectralField& x);
double norm_Uprime(const SpectralField& x);

// (u, v)_H for primal fields, <x, v> for a dual x against a primal v.
double inner(const SpectralField& x, const SpectralField& v);

// Zero all coefficients with index >= n. Works on primal and dual fields.
SpectralField project_Pn(const SpectralField& x, std::size_t n);

// Raw coefficient helpers shared by the solver and the noise module.
double squared_sum(std::span<const double> a);
double weighted_squared_sum(std::span<const double> a, std::span<const double> w);
// Euclidean norm with scaling, finite whenever every entry is finite.
double l2_norm(std::span<const double> a);

}  // namespace levyns
