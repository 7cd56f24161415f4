#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "levyns/galerkin.hpp"
#include "levyns/path_analysis.hpp"

namespace levyns {

// Initial data / forcing description. Presets:
//   zero; decaying (scale / (1 + |k_i|^2)); mode (scale * e_mode, 1-based);
//   random (N(0, scale^2) on the first `count` modes, drawn from `seed`);
//   coeffs (explicit list, zero padded); csv (forcing only: time,mode,value).
struct FieldSpec {
  std::string preset = "zero";
  double scale = 1.0;
  std::size_t mode = 1;
  std::size_t count = 0;
  std::uint64_t seed = 0;
  std::vector<double> coeffs;
  std::string csv;
};

struct ExperimentConfig {
  struct Basis {
    int d = 2;
    int n_max = 4;
    double m = 3.0;
    double eta0 = 0.5;
  } basis;

  struct Galerkin {
    std::vector<std::size_t> levels{4, 8, 16};
    double T = 1.0;
    double dt = 1.0 / 32.0;
    double R_stop = std::numeric_limits<double>::infinity();
    FieldSpec u0;
    FieldSpec forcing;
    // f_n = n^forcing_level_exponent * f (0 for a level-independent forcing).
    double forcing_level_exponent = 0.0;
    bool stokes = true, nonlinear = true, use_forcing = true, jumps = true, wiener = true;
  } galerkin;

  struct Marks {
    std::string kind = "finite";  // finite | uniform_box | power_law
    int dim = 1;
    std::vector<double> atoms{0.8, -0.5};
    std::vector<double> weights{1.0, 2.0};
    std::array<double, 3> lo{0.0, 0.0, 0.0};
    std::array<double, 3> hi{1.0, 1.0, 1.0};
    double mass = 1.0;
    double alpha = 0.5, scale = 1.0, eps = 0.01, ymax = 1.0;
  };

  struct Noise {
    std::string preset = "linear-multiplicative";
    double sigma_F = 0.5;
    double sigma_G = 0.5;
    std::size_t wiener_modes = 4;
    double gamma = 1.0;
    Marks marks;
    // Overrides applied on top of the constants derived from the preset.
    std::map<std::string, double> declared;
  } noise;

  struct Analysis {
    std::vector<double> p{2.0, 4.0};
    std::vector<double> deltas{0.5, 0.25, 0.125, 0.0625, 0.03125};
    std::vector<double> thetas{0.05, 0.1, 0.2, 0.4};
    std::vector<double> etas{1e-3, 1e-2};
    double q = 2.0;
    double epsilon = 0.1;
    double threshold = 0.1;
    double refinement = 0.25;
    double ratio_bound = 2.0;
    std::string stopping = "deterministic";  // deterministic | hitting
    double stop_time = 0.25;
    double stop_level = 1.0;
    std::size_t resamples = 1000;
  } analysis;

  struct Run {
    std::size_t M = 200;
    std::uint64_t seed = 1000;
    int workers = 0;
    std::string output = "levyns_out";
  } run;

  // Forcing table resolved at load (CSV contents included in the hash).
  ForcingTable forcing_table;
  bool has_forcing_table = false;

  // Parse and check every field and cross-field constraint; throws
  // IngestionError. Relative CSV paths resolve against base_dir.
  static ExperimentConfig from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
  static ExperimentConfig load(const std::filesystem::path& file);
  nlohmann::json to_json() const;
  // 16 hex digits; excludes run.workers and run.output.
  std::string hash() const;

  BasisPtr make_basis() const;
  std::shared_ptr<const MarkSpace> make_marks() const;
  std::shared_ptr<const NoiseCoefficients> make_noise(const BasisPtr& basis) const;
  DeclaredConstants declared_constants(const NoiseCoefficients& noise, const MarkSpace& marks) const;
  GalerkinConfig galerkin_config(const BasisPtr& basis, std::size_t level) const;
  TightnessOptions tightness_options() const;
};

std::string hex64(std::uint64_t v);
std::uint64_t fnv1a64(std::string_view bytes);

}  // namespace levyns
