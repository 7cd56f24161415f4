#pragma once

#include <cstddef>
#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <utility>
#include <vector>

#include "levyns/field.hpp"
#include "levyns/grid.hpp"

namespace levyns {

// <A u, .> as a dual element: coefficients |k_i|^2 a_i.
SpectralField stokes_apply(const SpectralField& u);

// Pseudo-spectral evaluation of <B(u, w), e_i> = b(u, w, e_i) for the first
// `active` modes on a dealiased grid. Owns FFT scratch; one per worker.
class BilinearEvaluator {
 public:
  BilinearEvaluator(BasisPtr basis, std::size_t active);
  BilinearEvaluator(BasisPtr basis, std::size_t active, int per_axis);

  std::size_t active() const { return grid_.active(); }
  const SpectralGrid& grid() const { return grid_; }

  // out[i] = b(u, w, e_i), i < active. u and w are read on their first `active` coefficients.
  void apply(std::span<const double> u, std::span<const double> w, std::span<double> out);
  // out[i] = b(e_i, w, z): the adjoint of u -> B(u, w).
  void apply_adjoint_first(std::span<const double> w, std::span<const double> z, std::span<double> out);

 private:
  SpectralGrid grid_;
  std::vector<double> u_phys_, grad_w_, product_, z_phys_;
};

// b(u, w, v) = int (u . grad w) . v dx (normalized measure).
double trilinear_b(const SpectralField& u, const SpectralField& w, const SpectralField& v);
SpectralField B_op(const SpectralField& u, const SpectralField& w);
SpectralField B_diag(const SpectralField& u);

// theta_n(r) = 1 - s(r - n), s(x) = 3x^2 - 2x^3 clamped to [0, 1].
struct CutoffSpec {
  std::size_t level = 1;
  double theta(double r) const;
};

// theta_n(|u|_{U'}) P_n B(u, u), returned as a dual field supported on e_1..e_n.
SpectralField truncated_Bn(const SpectralField& u, const CutoffSpec& spec);
void truncated_Bn(BilinearEvaluator& eval, const CutoffSpec& spec, const SpectralField& u, std::span<double> out);

struct AuditRecord {
  double lhs = 0.0;
  double rhs = 0.0;
  double constant = 0.0;
  bool satisfied = true;
  bool skipped = false;
  int band = 0;
};

inline constexpr double kAuditSlack = 1e-12;

// Largest |B(u, w)|_{V_m'} / (|u|_H |w|_H) found from `samples` random starts,
// each refined by alternating power iterations in w and u (a lower bound on
// the extension constant).
double fit_extension_constant(const BasisPtr& basis, std::size_t samples, std::uint64_t seed,
                              int ascent_steps = 20);

// Local Lipschitz constants of u -> B(u, u): V -> V' on balls of radius 2^band.
class LipschitzAudit {
 public:
  explicit LipschitzAudit(BasisPtr basis) : basis_(std::move(basis)) {}

  static int band_of(double radius);
  static double band_radius(int band) { return std::ldexp(1.0, band); }

  // Ratio |B(u) - B(v)|_{V'} / ||u - v||_V, or skipped when u == v.
  static AuditRecord ratio(const SpectralField& u, const SpectralField& v);

  // Max ratio over `samples` random pairs in the V-ball of the band.
  double fit(int band, std::size_t samples, std::uint64_t seed);
  // Fresh sample against the fitted constant; more than 1% violations re-fits
  // to the sample maximum. Returns the number of violations before re-fit.
  std::size_t validate(int band, std::size_t samples, std::uint64_t seed, bool* refitted = nullptr);

  bool has_constant(int band) const;
  double constant(int band) const;

  // Assigns the pair to its band by max(||u||_V, ||v||_V) and compares against L_band.
  AuditRecord audit(const SpectralField& u, const SpectralField& v) const;

 private:
  BasisPtr basis_;
  std::vector<std::pair<int, double>> constants_;
};

AuditRecord lipschitz_audit_B(const LipschitzAudit& fitted, const SpectralField& u, const SpectralField& v);

// Random primal field with ||x||_V = radius (direction Gaussian in coefficients).
SpectralField random_in_V_sphere(const BasisPtr& basis, std::size_t n, double radius, std::mt19937_64& rng);

}  // namespace levyns
