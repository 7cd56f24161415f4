#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "levyns/basis.hpp"
#include "levyns/subdomain.hpp"

namespace levyns {

struct Mark {
  std::array<double, 3> y{};
  double value() const { return y[0]; }
};

struct WeightedMark {
  Mark mark;
  double weight = 0.0;
};

enum class MarkSpaceKind { finite, box, power_law };

// Mark space Y with a finite intensity measure nu (after truncation).
class MarkSpace {
 public:
  // Atoms y_k with masses w_k.
  static MarkSpace finite(std::vector<Mark> atoms, std::vector<double> weights);
  // Box [lo, hi] in R^j (j <= 3) with density `density` bounded by `bound`.
  static MarkSpace box(int dim, std::array<double, 3> lo, std::array<double, 3> hi,
                       std::function<double(const Mark&)> density, double bound, int quadrature_nodes = 16);
  static MarkSpace uniform_box(int dim, std::array<double, 3> lo, std::array<double, 3> hi, double total_mass);
  // nu(dy) = scale * y^{-1-alpha} dy on (0, ymax], truncated to [eps, ymax].
  static MarkSpace power_law(double alpha, double scale, double eps, double ymax);

  MarkSpaceKind kind() const { return kind_; }
  int dim() const { return dim_; }
  double mass() const { return mass_; }
  // nu(A) for an axis-aligned box A.
  double measure(const Box& A) const;
  Mark sample(std::mt19937_64& rng) const;
  // Nodes and weights with sum of weights = mass (exact for finite spaces).
  const std::vector<WeightedMark>& quadrature() const { return quadrature_; }
  // int |y_0|^p nu(dy)
  double moment(double p) const;
  const std::string& truncation_note() const { return note_; }
  std::string describe() const;

 private:
  MarkSpaceKind kind_ = MarkSpaceKind::finite;
  int dim_ = 1;
  double mass_ = 0.0;
  std::vector<Mark> atoms_;
  std::vector<double> cumulative_;
  std::array<double, 3> lo_{}, hi_{};
  std::function<double(const Mark&)> density_;
  double bound_ = 0.0;
  double alpha_ = 0.0, scale_ = 0.0, eps_ = 0.0, ymax_ = 0.0;
  std::vector<WeightedMark> quadrature_;
  std::string note_;
};

struct JumpStream {
  double horizon = 0.0;
  std::uint64_t seed = 0;
  std::vector<double> times;
  std::vector<Mark> marks;

  std::size_t size() const { return times.size(); }
  std::size_t count_in(double a, double b) const;
  void write_csv(std::ostream& os) const;
};

// Time-homogeneous Poisson random measure on (0, T] x Y with intensity dt x nu.
JumpStream sample_jumps(const MarkSpace& space, double T, std::uint64_t seed);

using Integrand = std::function<void(double t, const Mark& y, std::span<double> out)>;

// sum_{t_j <= t_end} xi(t_j, y_j) - int_0^t_end int_Y xi dnu ds. The time
// integral uses the midpoint of each of `time_steps` equal subintervals (exact
// for xi piecewise constant on them).
std::vector<double> compensated_integral(const Integrand& xi, std::size_t dim, const JumpStream& jumps,
                                         const MarkSpace& space, double t_end, std::size_t time_steps = 1);

struct WienerConfig {
  std::size_t modes = 1;
  double dt = 0.0;
  std::size_t steps = 0;
  std::uint64_t seed = 0;
};

// steps x modes increments (row per step), i.i.d. N(0, dt).
std::vector<double> wiener_increments(const WienerConfig& cfg);

enum class NoisePreset { linear_multiplicative, gradient_multiplicative, additive };

const char* to_string(NoisePreset p);
NoisePreset noise_preset_from_string(const std::string& name);

struct DeclaredConstants {
  double L = 0.0;
  double C2 = 0.0, C4 = 0.0, C4g = 0.0, C8g = 0.0;  // p = 2, 4, 4 + gamma, 8 + 2 gamma
  double gamma = 1.0;
  double a = 2.0;
  double lambda = 0.0;
  double kappa = 0.0;
  double C_G = 0.0;  // ||G||^2_{HS(V')} <= C_G (1 + |u|_H^2)
  double L_G = 0.0;  // ||G(u) - G(v)||^2_{HS} <= L_G ||u - v||^2 (reported only)

  double growth(double p) const;
  std::array<double, 4> exponents() const { return {2.0, 4.0, 4.0 + gamma, 8.0 + 2.0 * gamma}; }
};

// Jump coefficient F(t, u; y) and Wiener coefficient G(t, u) e_l of a preset,
// acting on coefficient vectors of any length n (the Galerkin level).
class NoiseCoefficients {
 public:
  NoiseCoefficients(BasisPtr basis, NoisePreset preset, double sigma_F, double sigma_G, std::size_t wiener_modes,
                    double gamma = 1.0);

  NoisePreset preset() const { return preset_; }
  const BasisPtr& basis() const { return basis_; }
  double sigma_F() const { return sigma_F_; }
  double sigma_G() const { return sigma_G_; }
  std::size_t wiener_modes() const { return K_; }

  // Preset constants for the given mark space; callers may overwrite them.
  DeclaredConstants derived_constants(const MarkSpace& space) const;

  void F(double t, std::span<const double> u, const Mark& y, std::span<double> out) const;
  // Column l of G(t, u).
  void G(double t, std::span<const double> u, std::size_t l, std::span<double> out) const;
  // int_Y F(t, u; y) nu(dy) by the mark quadrature.
  void compensator(double t, std::span<const double> u, const MarkSpace& space, std::span<double> out) const;
  // ||G(t, u)||_HS^2 in H.
  double hs_norm2(double t, std::span<const double> u) const;

 private:
  BasisPtr basis_;
  NoisePreset preset_;
  double sigma_F_, sigma_G_;
  std::size_t K_;
  double gamma_;
};

struct AuditCheck {
  std::string name;
  double worst_lhs = 0.0;
  double worst_rhs = 0.0;
  double worst_ratio = 0.0;
  bool passed = true;
  std::string witness;
};

struct NoiseAudit {
  std::string assumption;
  std::vector<AuditCheck> checks;

  bool passed() const;
  // Throws AssumptionFailure naming the first failed check and its witness.
  void throw_if_failed() const;
};

// Lipschitz, growth and side-condition checks of F over the sample fields.
NoiseAudit validate_F(const NoiseCoefficients& coeffs, const MarkSpace& space, const DeclaredConstants& declared,
                      std::span<const std::vector<double>> samples);
// Coercivity and growth checks of G, plus the admissible range of a.
NoiseAudit validate_G_coercivity(const NoiseCoefficients& coeffs, const DeclaredConstants& declared,
                                 std::span<const std::vector<double>> samples);

}  // namespace levyns
