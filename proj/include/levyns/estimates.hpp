#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "levyns/galerkin.hpp"

namespace levyns {

struct Estimate {
  double mean = 0.0;
  double lo = 0.0;
  double hi = 0.0;
};

struct BootstrapOptions {
  std::size_t resamples = 1000;
  double confidence = 0.95;
  std::uint64_t seed = 0x5eed;
};

// Percentile bootstrap of the sample mean.
Estimate bootstrap_mean(std::span<const double> x, const BootstrapOptions& opt);

struct PMoment {
  double p = 0.0;
  Estimate value;  // E sup_t |u|_H^p
};

struct LevelMoments {
  std::size_t level = 0;
  std::size_t paths = 0;
  std::uint64_t base_seed = 0;
  std::vector<PMoment> sup_moments;
  Estimate grad_integral;  // E int_0^T ||u||^2 dt, ||u|| = |grad u|
};

struct MomentReport {
  double confidence = 0.95;
  std::size_t resamples = 0;
  std::vector<LevelMoments> levels;
};

// Per-path statistics used by the moment tables.
double sup_power_H(const CadlagPath& path, double p);
double grad_energy_integral(const CadlagPath& path);

// p must lie in [1, 4 + gamma].
LevelMoments moment_estimates(const Ensemble& ensemble, std::span<const double> ps, double gamma,
                              const BootstrapOptions& opt = {});

struct TaylorAudit {
  double p = 0.0;
  std::size_t dimension = 0;
  std::size_t fit_samples = 0;
  std::size_t validation_samples = 0;
  std::size_t skipped = 0;     // h = 0 pairs
  double fitted_c = 0.0;       // after any re-fit
  double initial_c = 0.0;
  std::size_t violations = 0;  // in the validation sample, against initial_c
  bool refitted = false;
};

// ratio(x, h) = | |x+h|^p - |x|^p - p |x|^{p-2} (x, h) | / ((|x|^{p-2} + |h|^{p-2}) |h|^2)
double taylor_ratio(std::span<const double> x, std::span<const double> h, double p);
// Pairs in R^n with random directions and |h| / |x| log-uniform over [1e-3, 1e3].
TaylorAudit taylor_inequality_audit(double p, std::size_t samples, std::size_t dimension, std::uint64_t seed);

struct EnergyStep {
  double t0 = 0.0;
  double t1 = 0.0;
  double delta_energy = 0.0;  // |u(t1)|^2 - |u(t0)|^2
  double dissipation = 0.0;   // -2 int ||u||^2
  double forcing = 0.0;       // 2 int (f, u)
  double compensator = 0.0;   // -2 int (c(u), u)
  double jumps = 0.0;         // sum |u- + F|^2 - |u-|^2
  double quadratic_variation = 0.0;  // ||G(u(t0))||_HS^2 h
  double martingale = 0.0;    // 2 (u(t0), G dW) + |G dW|^2 - ||G||^2 h
  double defect = 0.0;
};

struct EnergyJump {
  double t = 0.0;
  double lhs = 0.0;  // |u(t)|^2 - |u(t-)|^2 from the record
  double rhs = 0.0;  // |u(t-) + F(u(t-), y)|^2 - |u(t-)|^2 with F re-evaluated
  double defect = 0.0;
};

struct EnergyBalance {
  std::vector<EnergyStep> steps;
  std::vector<EnergyJump> jumps;
  double max_step_defect() const;
  double max_jump_defect() const;
};

// p = 2 Ito identity per solver step, with the noise regenerated from the
// path seed. The convection term is omitted ((B(u), u) = 0), so the defect
// measures the frozen-drift splitting error.
EnergyBalance energy_balance(const GalerkinConfig& cfg, const CadlagPath& path);

struct ScanOptions {
  double ratio_bound = 2.0;
  BootstrapOptions bootstrap;
};

struct LevelRatio {
  std::size_t from = 0;
  std::size_t to = 0;
  Estimate ratio;  // mean_{to} / mean_{from}, paired bootstrap
};

struct ScanStatistic {
  std::string name;  // "sup|u|^p" with p, or "int||u||^2"
  double p = 0.0;
  std::vector<Estimate> per_level;
  std::vector<LevelRatio> ratios;
  Estimate slope;  // d log(mean) / d log(n)
  bool significant_growth = false;  // slope CI above 0
  bool pass = false;                // every ratio CI upper end <= ratio_bound
};

struct ScanReport {
  std::vector<std::size_t> levels;
  std::size_t paired_paths = 0;
  std::vector<ScanStatistic> statistics;
  bool verdict = false;
};

// Ensembles share base seeds (common random numbers); paths are paired by
// seed and only seeds present at every level are used.
ScanReport constant_scan(std::span<const Ensemble> ensembles, std::span<const double> ps, const ScanOptions& opt = {});

}  // namespace levyns
