#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "levyns/basis.hpp"
#include "levyns/levy.hpp"
#include "levyns/operators.hpp"
#include "levyns/path.hpp"

namespace levyns {

// Piecewise-constant V'-valued forcing: row r (dual coefficients against
// e_1..e_N) holds on [times[r], times[r+1]).
struct ForcingTable {
  std::vector<double> times{0.0};
  std::vector<std::vector<double>> rows;

  bool empty() const { return rows.empty(); }
  static ForcingTable constant(std::vector<double> coeffs);
  // First n dual coefficients at time t.
  void value_at(double t, std::span<double> out) const;
  // ( int_0^T |f|_{V'}^2 dt )^{1/2}
  double l2_Vprime(const BasisTable& basis, double T) const;
  ForcingTable scaled(double s) const;
};

struct GalerkinConfig {
  BasisPtr basis;
  std::size_t level = 1;
  double T = 1.0;
  double dt = 0.01;
  std::vector<double> u0;
  ForcingTable forcing;
  std::shared_ptr<const NoiseCoefficients> noise;
  std::shared_ptr<const MarkSpace> marks;
  double R_stop = std::numeric_limits<double>::infinity();
  std::uint64_t seed = 0;

  bool stokes = true;
  bool nonlinear = true;
  bool use_forcing = true;
  bool jumps = true;
  bool wiener = true;

  void validate() const;
  std::size_t steps() const;
  double grid_time(std::size_t k) const;
  bool has_jumps() const { return jumps && noise && marks; }
  bool has_wiener() const { return wiener && noise; }
};

// One realization of the driving noise on [0, T].
struct NoiseRealization {
  JumpStream jumps;
  std::vector<double> normals;  // steps x K standard normals; increment = sqrt(h) z
  std::size_t modes = 0;
};

NoiseRealization sample_noise(const GalerkinConfig& cfg, std::uint64_t seed);

// Jump-adapted exponential Euler-Maruyama step on H_n. On [t, t + h] the
// drift D = -theta B(u) + f - int F dnu is frozen at u(t); between events
// the state follows the exact flow of u' = -lambda u + D; each jump adds
// P_n F(t_j, u(t_j-); y_j); the Wiener impulse sum_l P_n G_l(u(t)) dW_l is
// applied at t + h.
class GalerkinStepper {
 public:
  explicit GalerkinStepper(const GalerkinConfig& cfg);

  struct Result {
    bool stopped = false;
    double stop_time = 0.0;
  };

  // Advances `state` from t to t + h. Jumps with times in (t, t + h] are
  // applied in order. When `path` is given, the step and its events are
  // recorded and the stopping rule is applied after each event.
  Result step(std::span<double> state, double t, double h, std::span<const double> dW,
              std::span<const double> jump_times, std::span<const Mark> jump_marks, CadlagPath* path = nullptr);

  // Begins a path at u0 (applies the stopping rule at t = 0).
  Result start(std::span<const double> u0, CadlagPath& path);

 private:
  bool check_stop(CadlagPath& path, double t, std::span<const double> state);

  const GalerkinConfig& cfg_;
  std::size_t n_;
  std::vector<double> decay_;
  std::optional<BilinearEvaluator> eval_;
  CutoffSpec cutoff_;
  std::vector<double> b_, f_, c_, drift_, start_, left_, jump_, col_, impulse_;
  std::vector<double> jump_ledger_, wiener_ledger_;
  std::vector<double> event_times_;
  std::vector<std::vector<double>> event_sizes_;
};

CadlagPath simulate_path(const GalerkinConfig& cfg);
CadlagPath simulate_path(const GalerkinConfig& cfg, const NoiseRealization& noise, std::uint64_t seed);

struct PathFailure {
  std::uint64_t seed = 0;
  std::string message;
  double last_good_time = 0.0;
};

struct Ensemble {
  std::size_t level = 0;
  std::uint64_t base_seed = 0;
  std::vector<CadlagPath> paths;
  std::vector<PathFailure> failures;
};

Ensemble simulate_ensemble(const GalerkinConfig& cfg, std::size_t M, std::uint64_t base_seed, bool parallel = true);

// max over records (up to the stopping time) of the weak-form identity
//   (u(t), v) - (u(0), v) + int <A u, v> + int <B_n(u), v> - int <f, v> - <ledgers, v>
double weak_form_residual(const CadlagPath& path, const SpectralField& v);

}  // namespace levyns
