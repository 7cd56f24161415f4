#include <chrono>
#include <cstdio>
#include <random>
#include <vector>

#include <CLI11.hpp>

#include "levyns/basis.hpp"
#include "levyns/galerkin.hpp"
#include "levyns/kernels.hpp"

using namespace levyns;

namespace {

template <typename F>
double best_of(int reps, F&& f) {
  double best = 1e300;
  for (int r = 0; r < reps; ++r) {
    const auto t0 = std::chrono::steady_clock::now();
    f();
    best = std::min(best, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  }
  return best;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Serial vs OpenMP timings of the levyns kernels"};
  int d = 2, n_max = 8, points = 20000, paths = 64, reps = 3, workers = 0;
  app.add_option("--d", d);
  app.add_option("--n-max", n_max);
  app.add_option("--points", points);
  app.add_option("--paths", paths);
  app.add_option("--reps", reps);
  app.add_option("--workers", workers);
  CLI11_PARSE(app, argc, argv);
  kernels::set_workers(workers);

  const auto basis = build_basis(d, n_max);
  std::mt19937_64 rng(1);
  std::normal_distribution<double> g;
  std::uniform_real_distribution<double> x(0.0, 6.283185307179586);
  std::vector<double> coeffs(basis->size());
  for (auto& a : coeffs) a = g(rng) / (1.0 + basis->eigenvalues()[&a - coeffs.data()]);
  std::vector<double> pts(static_cast<std::size_t>(points) * d);
  for (auto& p : pts) p = x(rng);
  std::vector<double> out(pts.size());

  std::printf("workers %d, basis d=%d n_max=%d (N=%zu)\n", kernels::max_workers(), d, n_max, basis->size());
  std::printf("%-22s %12s %12s %8s\n", "kernel", "serial [s]", "omp [s]", "speedup");

  const double s1 = best_of(reps, [&] { kernels::serial::synthesize_points(*basis, coeffs, pts, out); });
  const double o1 = best_of(reps, [&] { kernels::omp::synthesize_points(*basis, coeffs, pts, out); });
  std::printf("%-22s %12.5f %12.5f %8.2f\n", "synthesize_points", s1, o1, s1 / o1);

  GalerkinConfig cfg;
  cfg.basis = basis;
  cfg.level = std::min<std::size_t>(16, basis->size());
  cfg.T = 1.0;
  cfg.dt = 1.0 / 64.0;
  cfg.u0.assign(basis->size(), 0.0);
  for (std::size_t i = 0; i < cfg.level; ++i) cfg.u0[i] = 1.0 / (1.0 + basis->eigenvalues()[i]);
  cfg.jumps = cfg.wiener = false;
  cfg.use_forcing = false;
  const auto M = static_cast<std::size_t>(paths);
  const double s2 = best_of(reps, [&] { (void)simulate_ensemble(cfg, M, 1, false); });
  const double o2 = best_of(reps, [&] { (void)simulate_ensemble(cfg, M, 1, true); });
  std::printf("%-22s %12.5f %12.5f %8.2f\n", "simulate_ensemble", s2, o2, s2 / o2);
  return 0;
}
