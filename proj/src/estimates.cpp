#include "levyns/estimates.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>

#include "levyns/error.hpp"
#include "levyns/random.hpp"
#include "levyns/path_analysis.hpp"
#include "levyns/quadrature.hpp"

namespace levyns {

namespace {

double mean_of(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v;
  return s / static_cast<double>(x.size());
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

Estimate percentile(std::vector<double> draws, double point, double confidence) {
  const double tail = 0.5 * (1.0 - confidence);
  return {point, quantile(draws, tail), quantile(draws, 1.0 - tail)};
}

void require_finite(std::span<const double> x, const char* what) {
  for (double v : x) {
    if (!std::isfinite(v)) throw DomainError(std::string(what) + ": non-finite statistic");
  }
}

}  // namespace

Estimate bootstrap_mean(std::span<const double> x, const BootstrapOptions& opt) {
  if (x.empty()) throw DomainError("bootstrap_mean: empty sample");
  std::mt19937_64 rng(opt.seed);
  std::uniform_int_distribution<std::size_t> pick(0, x.size() - 1);
  std::vector<double> draws(opt.resamples);
  for (auto& d : draws) {
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) s += x[pick(rng)];
    d = s / static_cast<double>(x.size());
  }
  return percentile(std::move(draws), mean_of(x), opt.confidence);
}

double sup_power_H(const CadlagPath& path, double p) { return std::pow(path.sup_norm_H(), p); }

double grad_energy_integral(const CadlagPath& path) {
  const auto lambda = path.basis()->eigenvalues();
  return path.quadratic_integral(lambda.first(path.level()));
}

LevelMoments moment_estimates(const Ensemble& ensemble, std::span<const double> ps, double gamma,
                              const BootstrapOptions& opt) {
  if (ensemble.paths.empty()) throw DomainError("moment_estimates: empty ensemble");
  for (double p : ps) {
    if (!(p >= 1.0 && p <= 4.0 + gamma)) throw DomainError("moment_estimates: p outside [1, 4 + gamma]");
  }
  LevelMoments out;
  out.level = ensemble.level;
  out.paths = ensemble.paths.size();
  out.base_seed = ensemble.base_seed;
  std::vector<double> sup(out.paths), grad(out.paths);
  for (std::size_t i = 0; i < out.paths; ++i) {
    sup[i] = ensemble.paths[i].sup_norm_H();
    grad[i] = grad_energy_integral(ensemble.paths[i]);
  }
  require_finite(sup, "moment_estimates");
  require_finite(grad, "moment_estimates");
  for (double p : ps) {
    std::vector<double> x(out.paths);
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = std::pow(sup[i], p);
    require_finite(x, "moment_estimates");
    out.sup_moments.push_back({p, bootstrap_mean(x, opt)});
  }
  out.grad_integral = bootstrap_mean(grad, opt);
  return out;
}

// ---------------------------------------------------------------- Taylor

double taylor_ratio(std::span<const double> x, std::span<const double> h, double p) {
  double xx = 0.0, hh = 0.0, xh = 0.0, ss = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    xx += x[i] * x[i];
    hh += h[i] * h[i];
    xh += x[i] * h[i];
    ss += (x[i] + h[i]) * (x[i] + h[i]);
  }
  if (hh == 0.0) return std::numeric_limits<double>::quiet_NaN();
  const double nx = std::sqrt(xx), nh = std::sqrt(hh), ns = std::sqrt(ss);
  const double lhs = std::abs(std::pow(ns, p) - std::pow(nx, p) - p * std::pow(nx, p - 2.0) * xh);
  return lhs / ((std::pow(nx, p - 2.0) + std::pow(nh, p - 2.0)) * hh);
}

namespace {

// Returns the largest ratio and appends every ratio to `all` when given.
double taylor_sample(double p, std::size_t samples, std::size_t n, std::mt19937_64& rng, std::size_t& skipped,
                     std::vector<double>* all) {
  std::normal_distribution<double> g(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<double> x(n), y(n), h(n);
  double best = 0.0;
  for (std::size_t s = 0; s < samples; ++s) {
    for (std::size_t i = 0; i < n; ++i) x[i] = g(rng);
    for (std::size_t i = 0; i < n; ++i) y[i] = g(rng);
    const double nx = l2_norm(x);
    for (double& v : x) v /= nx;
    const double proj = dot(x, y);
    for (std::size_t i = 0; i < n; ++i) y[i] -= proj * x[i];
    const double ny = l2_norm(y);
    const double scale = std::pow(10.0, -3.0 + 6.0 * unit(rng));
    const double c = 2.0 * unit(rng) - 1.0;
    const double sn = ny > 0.0 ? std::sqrt(1.0 - c * c) : 0.0;
    for (std::size_t i = 0; i < n; ++i) h[i] = scale * (c * x[i] + (ny > 0.0 ? sn * y[i] / ny : 0.0));
    const double r = taylor_ratio(x, h, p);
    if (std::isnan(r)) {
      ++skipped;
      continue;
    }
    best = std::max(best, r);
    if (all) all->push_back(r);
  }
  return best;
}

}  // namespace

TaylorAudit taylor_inequality_audit(double p, std::size_t samples, std::size_t dimension, std::uint64_t seed) {
  if (!(p >= 2.0)) throw DomainError("taylor_inequality_audit: p must be >= 2");
  if (dimension < 1 || samples < 1) throw DomainError("taylor_inequality_audit: empty sample");
  TaylorAudit a;
  a.p = p;
  a.dimension = dimension;
  a.fit_samples = samples;
  a.validation_samples = samples;
  std::mt19937_64 fit_rng(derive_seed(seed, 1)), val_rng(derive_seed(seed, 2));
  a.initial_c = taylor_sample(p, samples, dimension, fit_rng, a.skipped, nullptr);
  std::vector<double> fresh;
  const double worst = taylor_sample(p, samples, dimension, val_rng, a.skipped, &fresh);
  for (double r : fresh) a.violations += r > a.initial_c * (1.0 + 1e-12) ? 1 : 0;
  a.fitted_c = a.initial_c;
  if (static_cast<double>(a.violations) > 0.01 * static_cast<double>(fresh.size())) {
    a.fitted_c = std::max(a.initial_c, worst);
    a.refitted = true;
  }
  return a;
}

// ---------------------------------------------------------------- energy

double EnergyBalance::max_step_defect() const {
  double m = 0.0;
  for (const auto& s : steps) m = std::max(m, std::abs(s.defect));
  return m;
}

double EnergyBalance::max_jump_defect() const {
  double m = 0.0;
  for (const auto& j : jumps) m = std::max(m, std::abs(j.defect));
  return m;
}

EnergyBalance energy_balance(const GalerkinConfig& cfg, const CadlagPath& path) {
  if (path.level() != cfg.level || path.basis() != cfg.basis) {
    throw DomainError("energy_balance: path does not belong to the configuration");
  }
  const NoiseRealization noise = sample_noise(cfg, path.seed);
  const std::size_t n = cfg.level;
  const auto decay = path.decay();
  const QuadratureRule unit = gauss_legendre(8, 0.0, 1.0);
  std::vector<double> u(n), f(cfg.basis->size()), c(n), jump(n), col(n), g(n);

  auto piece = [&](double ta, double tb, EnergyStep& e) {
    const double len = tb - ta;
    if (len <= 0.0) return;
    for (std::size_t q = 0; q < unit.nodes.size(); ++q) {
      const double s = ta + unit.nodes[q] * len;
      const double w = unit.weights[q] * len;
      path.state_at(s, u);
      double diss = 0.0;
      for (std::size_t i = 0; i < n; ++i) diss += decay[i] * u[i] * u[i];
      e.dissipation -= 2.0 * w * diss;
      if (cfg.use_forcing) {
        cfg.forcing.value_at(s, f);
        e.forcing += 2.0 * w * dot(std::span<const double>(f).first(n), u);
      }
      if (cfg.has_jumps()) {
        cfg.noise->compensator(s, u, *cfg.marks, c);
        e.compensator -= 2.0 * w * dot(c, u);
      }
    }
  };

  EnergyBalance out;
  const std::size_t R = path.record_count();
  for (std::size_t r0 = 0; r0 < R; ++r0) {
    const std::size_t s = path.step_of(r0);
    if (s == CadlagPath::kNoStep || path.kind(r0) != EventKind::grid) continue;
    EnergyStep e;
    e.t0 = path.time(r0);
    const double h = path.step_h(s);
    std::size_t r = r0;
    bool wiener_applied = false;
    while (r + 1 < R) {
      const EventKind k = path.kind(r + 1);
      if (k == EventKind::stop) break;
      piece(path.time(r), path.time(r + 1), e);
      ++r;
      if (k == EventKind::grid) {
        wiener_applied = true;
        break;
      }
      const double tj = path.time(r);
      auto it = std::lower_bound(noise.jumps.times.begin(), noise.jumps.times.end(), tj);
      if (it == noise.jumps.times.end() || *it != tj) {
        throw DomainError("energy_balance: jump record without a matching noise event");
      }
      const auto left = path.left(r);
      cfg.noise->F(tj, left, noise.jumps.marks[static_cast<std::size_t>(it - noise.jumps.times.begin())], jump);
      double after = 0.0;
      for (std::size_t i = 0; i < n; ++i) after += (left[i] + jump[i]) * (left[i] + jump[i]);
      EnergyJump ej;
      ej.t = tj;
      ej.lhs = squared_sum(path.state(r)) - squared_sum(left);
      ej.rhs = after - squared_sum(left);
      ej.defect = ej.lhs - ej.rhs;
      out.jumps.push_back(ej);
      e.jumps += ej.rhs;
    }
    e.t1 = path.time(r);
    const auto u0 = path.state(r0);
    e.delta_energy = squared_sum(path.state(r)) - squared_sum(u0);
    if (wiener_applied && cfg.has_wiener()) {
      const std::size_t K = noise.modes;
      std::fill(g.begin(), g.end(), 0.0);
      for (std::size_t l = 0; l < K; ++l) {
        const double dW = std::sqrt(h) * noise.normals[s * K + l];
        cfg.noise->G(e.t0, u0, l, col);
        for (std::size_t i = 0; i < n; ++i) g[i] += col[i] * dW;
      }
      e.quadratic_variation = cfg.noise->hs_norm2(e.t0, u0) * h;
      e.martingale = 2.0 * dot(u0, g) + squared_sum(g) - e.quadratic_variation;
    }
    e.defect = e.delta_energy - (e.dissipation + e.forcing + e.compensator + e.jumps + e.quadratic_variation +
                                 e.martingale);
    out.steps.push_back(e);
  }
  return out;
}

// ---------------------------------------------------------------- scan

ScanReport constant_scan(std::span<const Ensemble> ensembles, std::span<const double> ps, const ScanOptions& opt) {
  std::vector<const Ensemble*> ens;
  for (const auto& e : ensembles) ens.push_back(&e);
  std::sort(ens.begin(), ens.end(), [](const Ensemble* a, const Ensemble* b) { return a->level < b->level; });
  for (std::size_t l = 1; l < ens.size(); ++l) {
    if (ens[l]->level == ens[l - 1]->level) throw DomainError("constant_scan: repeated level");
  }
  if (ens.size() < 3) throw DomainError("constant_scan: at least three levels are required");

  // Pair paths by seed.
  std::vector<std::map<std::uint64_t, const CadlagPath*>> by_seed(ens.size());
  for (std::size_t l = 0; l < ens.size(); ++l) {
    for (const auto& p : ens[l]->paths) by_seed[l][p.seed] = &p;
  }
  std::vector<std::uint64_t> seeds;
  for (const auto& [seed, p] : by_seed[0]) {
    bool everywhere = true;
    for (std::size_t l = 1; l < ens.size(); ++l) everywhere = everywhere && by_seed[l].count(seed) > 0;
    if (everywhere) seeds.push_back(seed);
  }
  if (seeds.size() < 2) throw DomainError("constant_scan: fewer than two paired paths");

  ScanReport rep;
  for (const auto* e : ens) rep.levels.push_back(e->level);
  rep.paired_paths = seeds.size();
  const std::size_t L = ens.size(), M = seeds.size();

  // Statistic tables X[stat][level][path].
  std::vector<std::vector<std::vector<double>>> X;
  std::vector<std::pair<std::string, double>> names;
  for (double p : ps) {
    names.emplace_back("sup|u|^p", p);
    X.emplace_back(L, std::vector<double>(M));
  }
  names.emplace_back("int||u||^2", 2.0);
  X.emplace_back(L, std::vector<double>(M));
  for (std::size_t l = 0; l < L; ++l) {
    for (std::size_t i = 0; i < M; ++i) {
      const CadlagPath& path = *by_seed[l].at(seeds[i]);
      const double sup = path.sup_norm_H();
      for (std::size_t k = 0; k < ps.size(); ++k) X[k][l][i] = std::pow(sup, ps[k]);
      X[ps.size()][l][i] = grad_energy_integral(path);
    }
  }
  for (const auto& stat : X) {
    for (const auto& row : stat) require_finite(row, "constant_scan");
  }

  std::vector<double> logn(L);
  for (std::size_t l = 0; l < L; ++l) logn[l] = std::log(static_cast<double>(rep.levels[l]));
  auto ratio = [](double a, double b) {
    if (a == 0.0) return b == 0.0 ? 1.0 : std::numeric_limits<double>::infinity();
    return b / a;
  };
  auto slope = [&](const std::vector<double>& means) {
    for (double m : means) {
      if (!(m > 0.0)) return 0.0;
    }
    double mx = 0.0, my = 0.0;
    for (std::size_t l = 0; l < L; ++l) {
      mx += logn[l] / static_cast<double>(L);
      my += std::log(means[l]) / static_cast<double>(L);
    }
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t l = 0; l < L; ++l) {
      sxy += (logn[l] - mx) * (std::log(means[l]) - my);
      sxx += (logn[l] - mx) * (logn[l] - mx);
    }
    return sxy / sxx;
  };

  const std::size_t B = opt.bootstrap.resamples;
  for (std::size_t k = 0; k < X.size(); ++k) {
    ScanStatistic st;
    st.name = names[k].first;
    st.p = names[k].second;
    std::vector<double> point(L);
    for (std::size_t l = 0; l < L; ++l) point[l] = mean_of(X[k][l]);

    std::mt19937_64 rng(opt.bootstrap.seed);
    std::uniform_int_distribution<std::size_t> pick(0, M - 1);
    std::vector<std::vector<double>> level_draws(L, std::vector<double>(B));
    std::vector<std::vector<double>> ratio_draws(L - 1, std::vector<double>(B));
    std::vector<double> slope_draws(B);
    std::vector<double> means(L);
    std::vector<std::size_t> idx(M);
    for (std::size_t b = 0; b < B; ++b) {
      for (auto& i : idx) i = pick(rng);
      for (std::size_t l = 0; l < L; ++l) {
        double s = 0.0;
        for (std::size_t i : idx) s += X[k][l][i];
        means[l] = s / static_cast<double>(M);
        level_draws[l][b] = means[l];
      }
      for (std::size_t l = 0; l + 1 < L; ++l) ratio_draws[l][b] = ratio(means[l], means[l + 1]);
      slope_draws[b] = slope(means);
    }
    for (std::size_t l = 0; l < L; ++l) {
      st.per_level.push_back(percentile(std::move(level_draws[l]), point[l], opt.bootstrap.confidence));
    }
    st.pass = true;
    for (std::size_t l = 0; l + 1 < L; ++l) {
      LevelRatio lr;
      lr.from = rep.levels[l];
      lr.to = rep.levels[l + 1];
      lr.ratio = percentile(std::move(ratio_draws[l]), ratio(point[l], point[l + 1]), opt.bootstrap.confidence);
      st.pass = st.pass && lr.ratio.hi <= opt.ratio_bound;
      st.ratios.push_back(lr);
    }
    st.slope = percentile(std::move(slope_draws), slope(point), opt.bootstrap.confidence);
    st.significant_growth = st.slope.lo > 0.0;
    rep.statistics.push_back(std::move(st));
  }
  rep.verdict = std::all_of(rep.statistics.begin(), rep.statistics.end(), [](const ScanStatistic& s) { return s.pass; });
  return rep;
}

}  // namespace levyns
