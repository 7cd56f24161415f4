#pragma once

#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "levyns/field.hpp"
#include "levyns/path.hpp"

namespace levyns {

// Real-valued right-continuous step path: value[k] on [time[k], time[k+1]),
// the last value holds on [time.back(), T].
class RealCadlagPath {
 public:
  RealCadlagPath() = default;
  RealCadlagPath(std::vector<double> times, std::vector<double> values, double horizon);

  double horizon() const { return horizon_; }
  std::span<const double> times() const { return times_; }
  std::span<const double> values() const { return values_; }
  double value_at(double t) const;

 private:
  std::vector<double> times_;
  std::vector<double> values_;
  double horizon_ = 0.0;
};

using StateMetric = std::function<double(std::span<const double>, std::span<const double>)>;

// Step path with vector states compared through a metric. Samples at equal
// times collapse to the last one (right continuity).
class MetricPath {
 public:
  MetricPath() = default;
  MetricPath(std::vector<double> times, std::vector<std::vector<double>> states, double horizon, StateMetric metric);

  static MetricPath from_real(const RealCadlagPath& u);
  // Records of a Galerkin path plus a uniform refinement of spacing h (h <= 0:
  // records only), measured in |.|_H.
  static MetricPath from_galerkin_H(const CadlagPath& path, double h);
  // Same sampling measured in the Holly-Wiciak dual norm |.|_{U'}.
  static MetricPath from_galerkin_Uprime(const CadlagPath& path, double h);

  std::size_t size() const { return times_.size(); }
  double horizon() const { return horizon_; }
  std::span<const double> times() const { return times_; }
  std::span<const double> state(std::size_t k) const { return states_[k]; }
  double distance(std::size_t i, std::size_t j) const { return metric_(states_[i], states_[j]); }
  double distance_to(std::size_t i, std::span<const double> x) const { return metric_(states_[i], x); }
  const StateMetric& metric() const { return metric_; }
  // Index of the sample active at t.
  std::size_t index_at(double t) const;
  // Level used by hitting-time stopping rules (|u|_H for Galerkin samples,
  // |x| for real paths).
  double level(std::size_t k) const { return levels_[k]; }
  void set_levels(std::vector<double> levels) { levels_ = std::move(levels); }
  // max_{i,j} rho(u_i, u_j)
  double diameter() const;

 private:
  std::vector<double> times_;
  std::vector<std::vector<double>> states_;
  std::vector<double> levels_;
  double horizon_ = 0.0;
  StateMetric metric_;
};

StateMetric euclidean_metric();
StateMetric weighted_metric(std::vector<double> weights);

// Candidate breakpoints: all sample times plus T.
std::vector<double> default_candidates(const MetricPath& u);

// inf over partitions 0 = t_0 < ... < t_k = T drawn from the candidates with
// t_{i+1} - t_i >= delta of the largest oscillation over [t_i, t_{i+1}).
double modulus(const MetricPath& u, double delta);
double modulus(const MetricPath& u, double delta, std::span<const double> candidates);
// Exhaustive enumeration over subsets of at most 14 interior candidates.
double modulus_bruteforce(const MetricPath& u, double delta);
double modulus_bruteforce(const MetricPath& u, double delta, std::span<const double> candidates);

struct ModulusPoint {
  double delta = 0.0;
  double w = 0.0;
};
using ModulusCurve = std::vector<ModulusPoint>;

// Deltas are sorted decreasing; candidates are shared across deltas so the
// curve is monotone.
ModulusCurve modulus_curve(const MetricPath& u, std::vector<double> deltas);

struct SkorokhodOptions {
  // Knot candidates: each breakpoint of one path is paired with this many
  // nearest breakpoints of the other (0 = all pairs).
  std::size_t nearest = 4;
};

// Upper bound on delta_T over piecewise-linear time changes with knots at
// matched breakpoints (identity included).
double skorokhod_distance(const MetricPath& u, const MetricPath& v, const SkorokhodOptions& opt = {});
// Same class, every monotone matching enumerated (small paths only).
double skorokhod_bruteforce(const MetricPath& u, const MetricPath& v, const SkorokhodOptions& opt = {});
double skorokhod_distance(const RealCadlagPath& u, const RealCadlagPath& v, const SkorokhodOptions& opt = {});

// t -> (u(t), h)_H at every record.
RealCadlagPath weak_projection_path(const CadlagPath& path, const SpectralField& h);

// q(x, y) = sum_k 2^{-k} |(x - y, e_k)| / (1 + |(x - y, e_k)|)
double weak_ball_q(std::span<const double> x, std::span<const double> y);
// delta_{T,r}: Skorokhod construction with q on the record paths; paths may
// live on different levels (coefficients are zero padded).
double weak_ball_metric(const CadlagPath& u, const CadlagPath& v, double r, const SkorokhodOptions& opt = {});

struct StoppingRule {
  enum class Kind { deterministic, hitting } kind = Kind::deterministic;
  double time = 0.0;   // deterministic tau
  double level = 0.0;  // first time level(X) >= level, else T
  double tau(const MetricPath& x) const;
};

struct AldousRow {
  double theta = 0.0;
  double eta = 0.0;
  std::size_t hits = 0;
  std::size_t paths = 0;
  double probability = 0.0;
  double wilson_lo = 0.0;
  double wilson_hi = 0.0;
  double sup_probability = 0.0;  // max over theta' <= theta
  double excess_mass = 0.0;      // fraction with tau + theta > T
};

// Empirical P(rho(X((tau + theta) ^ T), X(tau)) >= eta) per (theta, eta).
std::vector<AldousRow> aldous_estimate(std::span<const MetricPath> paths, const StoppingRule& rule,
                                       std::vector<double> thetas, std::span<const double> etas, double z = 1.96);

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};
Interval wilson_interval(std::size_t hits, std::size_t n, double z);

struct TightnessOptions {
  double q = 2.0;
  std::vector<double> deltas;
  double epsilon = 0.1;
  double threshold = 0.1;  // (1-eps)-quantile of w/diam at the smallest delta
  double sup_bound = std::numeric_limits<double>::infinity();
  double lq_bound = std::numeric_limits<double>::infinity();
  // Sampling / candidate spacing as a fraction of the smallest delta.
  double refinement = 0.25;
  // Aldous table in |.|_{U'} (skipped when either grid is empty).
  StoppingRule rule;
  std::vector<double> thetas;
  std::vector<double> etas;
};

struct TightnessReport {
  double sup_H = 0.0;       // (a) max over paths of sup_t |u|_H
  double lq_V = 0.0;        // (b) max over paths of int ||u||_V^q dt
  ModulusCurve quantile;    // (c) (1-eps)-quantile over paths of w_H(u, delta) / diam_H(u)
  std::vector<AldousRow> aldous;
  bool monotone = true;
  bool pass_a = true;
  bool pass_b = true;
  bool pass_c = true;
  bool verdict = true;
};

TightnessReport tightness_report(std::span<const CadlagPath> paths, const TightnessOptions& opt);

// int_0^T ||u||_V^q dt (exact for q = 2, Gauss-Legendre on each flow piece otherwise).
double lq_V_integral(const CadlagPath& path, double q);

// Empirical quantile (type 7, linear interpolation).
double quantile(std::vector<double> values, double p);

}  // namespace levyns
