#include "levyns/galerkin.hpp"

#include <algorithm>
#include <cmath>

#include "levyns/error.hpp"
#include "levyns/field.hpp"
#include "levyns/kernels.hpp"
#include "levyns/random.hpp"

namespace levyns {

ForcingTable ForcingTable::constant(std::vector<double> coeffs) {
  ForcingTable f;
  f.rows.push_back(std::move(coeffs));
  return f;
}

void ForcingTable::value_at(double t, std::span<double> out) const {
  std::fill(out.begin(), out.end(), 0.0);
  if (rows.empty()) return;
  auto it = std::upper_bound(times.begin(), times.end(), t);
  const std::size_t r = it == times.begin() ? 0 : static_cast<std::size_t>(it - times.begin()) - 1;
  const auto& row = rows[std::min(r, rows.size() - 1)];
  for (std::size_t i = 0; i < out.size() && i < row.size(); ++i) out[i] = row[i];
}

double ForcingTable::l2_Vprime(const BasisTable& basis, double T) const {
  double total = 0.0;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const double a = std::min(times[r], T);
    const double b = r + 1 < times.size() ? std::min(times[r + 1], T) : T;
    if (b <= a) continue;
    double s = 0.0;
    for (std::size_t i = 0; i < rows[r].size(); ++i) s += rows[r][i] * rows[r][i] / (1.0 + basis.eigenvalues()[i]);
    total += (b - a) * s;
  }
  return std::sqrt(total);
}

ForcingTable ForcingTable::scaled(double s) const {
  ForcingTable f = *this;
  for (auto& row : f.rows)
    for (double& v : row) v *= s;
  return f;
}

void GalerkinConfig::validate() const {
  if (!basis) throw DomainError("GalerkinConfig: missing basis");
  if (level < 1 || level > basis->size()) throw DomainError("GalerkinConfig: level n must lie in [1, N]");
  if (!(T > 0.0) || !std::isfinite(T)) throw DomainError("GalerkinConfig: horizon T must be positive");
  if (!(dt > 0.0)) throw DomainError("GalerkinConfig: dt must be positive");
  if (u0.size() < level) throw DomainError("GalerkinConfig: u0 has fewer coefficients than the level");
  for (double v : u0) {
    if (!std::isfinite(v)) throw DomainError("GalerkinConfig: u0 must have finite H norm");
  }
  if (forcing.times.size() != std::max<std::size_t>(1, forcing.rows.size()) || forcing.times.front() != 0.0) {
    throw DomainError("GalerkinConfig: forcing table needs one start time per row, starting at 0");
  }
  if (!std::is_sorted(forcing.times.begin(), forcing.times.end())) {
    throw DomainError("GalerkinConfig: forcing times must be nondecreasing");
  }
  if (!(R_stop >= 0.0)) throw DomainError("GalerkinConfig: R_stop must be nonnegative");
  if (noise && noise->basis() != basis) throw DomainError("GalerkinConfig: noise lives on a different basis");
}

std::size_t GalerkinConfig::steps() const {
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(T / dt - 1e-9)));
}

double GalerkinConfig::grid_time(std::size_t k) const {
  return k >= steps() ? T : static_cast<double>(k) * dt;
}

NoiseRealization sample_noise(const GalerkinConfig& cfg, std::uint64_t seed) {
  NoiseRealization r;
  r.jumps.horizon = cfg.T;
  r.jumps.seed = seed;
  if (cfg.has_jumps()) r.jumps = sample_jumps(*cfg.marks, cfg.T, derive_seed(seed, kJumpStream));
  if (cfg.has_wiener()) {
    r.modes = cfg.noise->wiener_modes();
    r.normals = wiener_increments({r.modes, 1.0, cfg.steps(), derive_seed(seed, kWienerStream)});
  }
  return r;
}

GalerkinStepper::GalerkinStepper(const GalerkinConfig& cfg) : cfg_(cfg), n_(cfg.level), cutoff_{cfg.level} {
  decay_.assign(n_, 0.0);
  if (cfg.stokes) {
    for (std::size_t i = 0; i < n_; ++i) decay_[i] = cfg.basis->eigenvalues()[i];
  }
  if (cfg.nonlinear) eval_.emplace(cfg.basis, n_);
  for (auto* v : {&b_, &f_, &c_, &drift_, &start_, &left_, &jump_, &col_, &impulse_, &jump_ledger_, &wiener_ledger_}) {
    v->assign(n_, 0.0);
  }
}

bool GalerkinStepper::check_stop(CadlagPath& path, double t, std::span<const double> state) {
  if (!std::isfinite(cfg_.R_stop) || !(l2_norm(state) >= cfg_.R_stop)) return false;
  path.add_record(t, EventKind::stop, CadlagPath::kNoStep, state, state, jump_ledger_, wiener_ledger_);
  path.mark_stopped(t);
  return true;
}

GalerkinStepper::Result GalerkinStepper::start(std::span<const double> u0, CadlagPath& path) {
  std::fill(jump_ledger_.begin(), jump_ledger_.end(), 0.0);
  std::fill(wiener_ledger_.begin(), wiener_ledger_.end(), 0.0);
  const auto a0 = u0.first(n_);
  path.add_record(0.0, EventKind::grid, CadlagPath::kNoStep, a0, a0, jump_ledger_, wiener_ledger_);
  if (check_stop(path, 0.0, a0)) return {true, 0.0};
  return {};
}

GalerkinStepper::Result GalerkinStepper::step(std::span<double> state, double t, double h,
                                              std::span<const double> dW, std::span<const double> jump_times,
                                              std::span<const Mark> jump_marks, CadlagPath* path) {
  const std::size_t n = n_;
  std::copy(state.begin(), state.begin() + static_cast<long>(n), start_.begin());
  const std::span<const double> u(start_);

  std::fill(b_.begin(), b_.end(), 0.0);
  if (eval_) {
    double r2 = 0.0;
    const auto radii = cfg_.basis->u_radii();
    for (std::size_t i = 0; i < n; ++i) r2 += (radii[i] * u[i]) * (radii[i] * u[i]);
    const double th = cutoff_.theta(std::sqrt(r2));
    if (th > 0.0) {
      eval_->apply(u, u, b_);
      if (th != 1.0) {
        for (double& v : b_) v *= th;
      }
    }
  }
  std::fill(f_.begin(), f_.end(), 0.0);
  if (cfg_.use_forcing) cfg_.forcing.value_at(t, f_);
  std::fill(c_.begin(), c_.end(), 0.0);
  if (cfg_.has_jumps()) cfg_.noise->compensator(t, u, *cfg_.marks, c_);
  for (std::size_t i = 0; i < n; ++i) drift_[i] = -b_[i] + f_[i] - c_[i];

  std::size_t s = CadlagPath::kNoStep;
  if (path) {
    s = path->add_step(t, h, b_, f_, c_);
    path->bind_step(path->record_count() - 1, s);
  }

  event_times_.clear();
  std::size_t used = 0;
  // Superposition from the step start; a zero jump adds exact zeros.
  auto flow = [&](double at, std::span<double> out) {
    const double tau = at - t;
    for (std::size_t i = 0; i < n; ++i) {
      const double lambda = decay_[i];
      double v = std::exp(-lambda * tau) * u[i] + phi1(lambda, tau) * drift_[i];
      for (std::size_t e = 0; e < event_times_.size(); ++e) v += std::exp(-lambda * (at - event_times_[e])) * event_sizes_[e][i];
      out[i] = v;
    }
  };
  auto fail_if_nonfinite = [&](std::span<const double> x, double at) {
    for (double v : x) {
      if (!std::isfinite(v)) throw IntegrationFailure("Galerkin state became non-finite", at);
    }
  };

  std::vector<double> jump_sum(n, 0.0), ledger(n), now(n);
  for (std::size_t j = 0; j < jump_times.size(); ++j) {
    const double tj = jump_times[j];
    if (tj <= t || tj > t + h) continue;
    flow(tj, left_);
    cfg_.noise->F(tj, left_, jump_marks[j], jump_);
    if (event_sizes_.size() <= used) event_sizes_.emplace_back(n);
    std::copy(jump_.begin(), jump_.end(), event_sizes_[used].begin());
    event_times_.push_back(tj);
    ++used;
    for (std::size_t i = 0; i < n; ++i) {
      jump_sum[i] += jump_[i];
      now[i] = left_[i] + jump_[i];
    }
    fail_if_nonfinite(now, t);
    if (path) {
      for (std::size_t i = 0; i < n; ++i) ledger[i] = jump_ledger_[i] + jump_sum[i] - c_[i] * (tj - t);
      path->add_record(tj, EventKind::jump, s, now, left_, ledger, wiener_ledger_);
      if (std::isfinite(cfg_.R_stop) && l2_norm(now) >= cfg_.R_stop) {
        std::copy(ledger.begin(), ledger.end(), jump_ledger_.begin());
        check_stop(*path, tj, now);
        std::copy(now.begin(), now.end(), state.begin());
        return {true, tj};
      }
    }
  }

  const double t1 = t + h;
  flow(t1, left_);
  std::fill(impulse_.begin(), impulse_.end(), 0.0);
  if (cfg_.has_wiener()) {
    for (std::size_t l = 0; l < dW.size(); ++l) {
      if (dW[l] == 0.0) continue;
      cfg_.noise->G(t, u, l, col_);
      for (std::size_t i = 0; i < n; ++i) impulse_[i] += col_[i] * dW[l];
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    state[i] = left_[i] + impulse_[i];
    jump_ledger_[i] += jump_sum[i] - c_[i] * h;
    wiener_ledger_[i] += impulse_[i];
  }
  fail_if_nonfinite(state.first(n), t);
  if (path) {
    path->add_record(t1, EventKind::grid, CadlagPath::kNoStep, state.first(n), left_, jump_ledger_, wiener_ledger_);
    if (check_stop(*path, t1, state.first(n))) return {true, t1};
  }
  return {};
}

CadlagPath simulate_path(const GalerkinConfig& cfg, const NoiseRealization& noise, std::uint64_t seed) {
  cfg.validate();
  CadlagPath path(cfg.basis, cfg.level, cfg.T, cfg.stokes);
  path.seed = seed;
  GalerkinStepper stepper(cfg);
  std::vector<double> state(cfg.u0.begin(), cfg.u0.begin() + static_cast<long>(cfg.level));
  if (stepper.start(state, path).stopped) return path;
  const std::size_t S = cfg.steps();
  const std::size_t K = noise.modes;
  std::vector<double> dW(K);
  std::size_t next_jump = 0;
  for (std::size_t k = 0; k < S; ++k) {
    const double t0 = cfg.grid_time(k);
    const double t1 = cfg.grid_time(k + 1);
    const double h = t1 - t0;
    for (std::size_t l = 0; l < K; ++l) dW[l] = std::sqrt(h) * noise.normals[k * K + l];
    std::size_t last = next_jump;
    while (last < noise.jumps.size() && noise.jumps.times[last] <= t1) ++last;
    const std::span<const double> times(noise.jumps.times.data() + next_jump, last - next_jump);
    const std::span<const Mark> marks(noise.jumps.marks.data() + next_jump, last - next_jump);
    next_jump = last;
    if (stepper.step(state, t0, h, dW, times, marks, &path).stopped) break;
  }
  return path;
}

CadlagPath simulate_path(const GalerkinConfig& cfg) {
  return simulate_path(cfg, sample_noise(cfg, cfg.seed), cfg.seed);
}

Ensemble simulate_ensemble(const GalerkinConfig& cfg, std::size_t M, std::uint64_t base_seed, bool parallel) {
  if (M < 1) throw DomainError("simulate_ensemble: need at least one path");
  cfg.validate();
  std::vector<CadlagPath> paths(M);
  std::vector<std::optional<PathFailure>> failures(M);
  auto run = [&](std::size_t i) {
    const std::uint64_t seed = base_seed + i;
    try {
      paths[i] = simulate_path(cfg, sample_noise(cfg, seed), seed);
    } catch (const IntegrationFailure& e) {
      failures[i] = PathFailure{seed, e.what(), e.last_good_time()};
    }
  };
  if (parallel) {
    kernels::omp::for_each_index(M, run);
  } else {
    kernels::serial::for_each_index(M, run);
  }
  Ensemble ens;
  ens.level = cfg.level;
  ens.base_seed = base_seed;
  for (std::size_t i = 0; i < M; ++i) {
    if (failures[i]) {
      ens.failures.push_back(*failures[i]);
    } else {
      ens.paths.push_back(std::move(paths[i]));
    }
  }
  return ens;
}

double weak_form_residual(const CadlagPath& path, const SpectralField& v) {
  const std::size_t n = path.level();
  if (v.is_dual()) throw DomainError("weak_form_residual: test function must be primal");
  if (v.basis() != path.basis()) throw DomainError("weak_form_residual: test function on a different basis");
  if (v.support() > n) throw DomainError("weak_form_residual: test function outside span(e_1..e_n)");
  if (path.record_count() == 0) return 0.0;
  const auto decay = path.decay();
  const auto a0 = path.state(0);
  std::vector<double> stokes(n, 0.0), bint(n, 0.0), fint(n, 0.0);
  double worst = 0.0;
  for (std::size_t r = 0; r < path.record_count(); ++r) {
    const auto a = path.state(r);
    const auto jl = path.jump_ledger(r);
    const auto wl = path.wiener_ledger(r);
    double res = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (v[i] == 0.0) continue;
      res += v[i] * (a[i] - a0[i] + stokes[i] + bint[i] - fint[i] - jl[i] - wl[i]);
    }
    worst = std::max(worst, std::abs(res));
    const std::size_t s = path.step_of(r);
    if (s == CadlagPath::kNoStep || r + 1 == path.record_count()) continue;
    const double L = path.time(r + 1) - path.time(r);
    const auto b = path.drift_b(s), f = path.drift_f(s), c = path.drift_c(s);
    for (std::size_t i = 0; i < n; ++i) {
      const double lambda = decay[i];
      const double D = -b[i] + f[i] - c[i];
      if (lambda > 0.0) stokes[i] += a[i] * -std::expm1(-lambda * L) + D * (L - phi1(lambda, L));
      bint[i] += b[i] * L;
      fint[i] += f[i] * L;
    }
  }
  return worst;
}

}  // namespace levyns
