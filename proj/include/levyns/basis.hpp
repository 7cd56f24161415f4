#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <span>
#include <vector>

namespace levyns {

inline constexpr int kMaxDim = 3;

// Nondimensional wavenumber on the periodic box [0, 2pi)^d. Unused trailing
// components are zero.
struct WaveVector {
  int dim = 2;
  std::array<int, kMaxDim> k{};

  long norm2() const;
  int max_abs() const;
  double dot(std::span<const double> x) const;
  bool operator==(const WaveVector&) const = default;
};

enum class Parity : std::uint8_t { cosine = 0, sine = 1 };

// One real divergence-free mode sqrt(2) * phi(k.x) * p, with phi in {cos, sin}
// and p the normalized integer polarization vector (k . polarization = 0).
struct Mode {
  WaveVector k;
  int polarization = 0;
  Parity parity = Parity::cosine;
  std::array<long, kMaxDim> polarization_int{};
  std::array<double, kMaxDim> unit_polarization{};
};

struct HollyWiciakWeights {
  std::vector<double> eta;  // eta_1 .. eta_N (eta_0 excluded)
  std::vector<double> r;    // r_n = (1 - eta_n) / (2 |h_n|_Phi)
};

// Weights of the Hilbert space U compactly embedded in Phi, built from the
// Phi-norms of an H-orthonormal family: |x|_U^2 = sum |(x|h_n)|^2 / r_n^2.
HollyWiciakWeights holly_wiciak_weights(std::span<const double> phi_norms, double eta0);

// Enumerated divergence-free Fourier basis e_1..e_N, sorted by eigenvalue.
// Immutable after construction.
class BasisTable {
 public:
  int dim() const { return dim_; }
  int n_max() const { return n_max_; }
  double sobolev_order() const { return m_; }
  double eta0() const { return eta0_; }
  std::size_t size() const { return modes_.size(); }

  const Mode& mode(std::size_t i) const { return modes_.at(i); }
  std::span<const Mode> modes() const { return modes_; }
  // |k_i|^2, the Stokes eigenvalues.
  std::span<const double> eigenvalues() const { return eigenvalues_; }
  // (1 + |k_i|^2)^{m/2}
  std::span<const double> vm_norms() const { return vm_norms_; }
  std::span<const double> eta() const { return hw_.eta; }
  // r_i; |e_i|_{U'} = r_i.
  std::span<const double> u_radii() const { return hw_.r; }
  // 1 / r_i^2 (may overflow to +inf for very long tables).
  std::span<const double> u_weights() const { return u_weights_; }

  // Largest |k|_inf among the first n modes.
  int max_wavenumber(std::size_t n) const;
  // Evaluate mode i at a physical point x (d components), writing d values.
  void evaluate_mode(std::size_t i, std::span<const double> x, std::span<double> out) const;

  std::uint64_t hash() const;

  // Versioned CSV: mode index, k, polarization, parity, eigenvalue, vm_norm, u_weight.
  void write_csv(std::ostream& os) const;

  friend std::shared_ptr<const BasisTable> build_basis(int d, int n_max, double m, double eta0);

 private:
  BasisTable() = default;

  int dim_ = 2;
  int n_max_ = 1;
  double m_ = 3.0;
  double eta0_ = 0.5;
  std::vector<Mode> modes_;
  std::vector<double> eigenvalues_;
  std::vector<double> vm_norms_;
  HollyWiciakWeights hw_;
  std::vector<double> u_weights_;
};

using BasisPtr = std::shared_ptr<const BasisTable>;

// d in {2,3}; n_max >= 1; m > d/2 + 1; eta0 in (0,1). Modes are all k != 0 with
// |k|^2 <= n_max^2 in the half space whose first nonzero component is positive.
BasisPtr build_basis(int d, int n_max, double m = 3.0, double eta0 = 0.5);

inline constexpr int kBasisCsvVersion = 1;

}  // namespace levyns
