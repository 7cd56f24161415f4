#include "levyns/operators.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>

#include "levyns/error.hpp"

namespace levyns {

SpectralField stokes_apply(const SpectralField& u) {
  if (u.is_dual()) throw DomainError("stokes_apply: expects a primal field");
  SpectralField out(u.basis(), true);
  const auto lambda = u.table().eigenvalues();
  for (std::size_t i = 0; i < u.size(); ++i) out[i] = lambda[i] * u[i];
  assert(dual_norm_V(out) <= seminorm_grad(u) * (1.0 + 1e-12) + 1e-300);
  return out;
}

BilinearEvaluator::BilinearEvaluator(BasisPtr basis, std::size_t active)
    : BilinearEvaluator(basis, active, SpectralGrid::dealiased_size(basis->max_wavenumber(active))) {}

BilinearEvaluator::BilinearEvaluator(BasisPtr basis, std::size_t active, int per_axis)
    : grid_(std::move(basis), active, per_axis) {
  if (!grid_.resolves_triads()) {
    throw DomainError("BilinearEvaluator: grid under-resolved for exact triad quadrature (needs >= 3 K + 1)");
  }
  const auto d = static_cast<std::size_t>(grid_.dim());
  u_phys_.resize(d * grid_.points());
  grad_w_.resize(d * d * grid_.points());
  product_.resize(d * grid_.points());
  z_phys_.resize(d * grid_.points());
}

void BilinearEvaluator::apply(std::span<const double> u, std::span<const double> w, std::span<double> out) {
  const int d = grid_.dim();
  const std::size_t P = grid_.points();
  const std::size_t n = grid_.active();
  grid_.synthesize(u.first(n), u_phys_);
  grid_.synthesize_gradient(w.first(n), grad_w_);
  for (int c = 0; c < d; ++c) {
    double* dst = product_.data() + static_cast<std::size_t>(c) * P;
    std::fill(dst, dst + P, 0.0);
    for (int j = 0; j < d; ++j) {
      const double* uj = u_phys_.data() + static_cast<std::size_t>(j) * P;
      const double* g = grad_w_.data() + static_cast<std::size_t>(c * d + j) * P;
      for (std::size_t p = 0; p < P; ++p) dst[p] += uj[p] * g[p];
    }
  }
  grid_.analyze(product_, out.first(n));
}

void BilinearEvaluator::apply_adjoint_first(std::span<const double> w, std::span<const double> z,
                                            std::span<double> out) {
  const int d = grid_.dim();
  const std::size_t P = grid_.points();
  const std::size_t n = grid_.active();
  grid_.synthesize(z.first(n), z_phys_);
  grid_.synthesize_gradient(w.first(n), grad_w_);
  for (int j = 0; j < d; ++j) {
    double* dst = product_.data() + static_cast<std::size_t>(j) * P;
    std::fill(dst, dst + P, 0.0);
    for (int c = 0; c < d; ++c) {
      const double* zc = z_phys_.data() + static_cast<std::size_t>(c) * P;
      const double* g = grad_w_.data() + static_cast<std::size_t>(c * d + j) * P;
      for (std::size_t p = 0; p < P; ++p) dst[p] += zc[p] * g[p];
    }
  }
  grid_.analyze(product_, out.first(n));
}

namespace {

void require_shared(const SpectralField& a, const SpectralField& b) {
  if (a.basis() != b.basis()) throw DomainError("operators: fields live on different bases");
  if (a.is_dual() || b.is_dual()) throw DomainError("operators: expects primal fields");
}

std::size_t joint_support(const SpectralField& a, const SpectralField& b) {
  return std::max<std::size_t>(1, std::max(a.support(), b.support()));
}

}  // namespace

SpectralField B_op(const SpectralField& u, const SpectralField& w) {
  require_shared(u, w);
  SpectralField out(u.basis(), true);
  BilinearEvaluator eval(u.basis(), u.size());
  eval.apply(u.coeffs(), w.coeffs(), out.coeffs());
  return out;
}

SpectralField B_diag(const SpectralField& u) { return B_op(u, u); }

double trilinear_b(const SpectralField& u, const SpectralField& w, const SpectralField& v) {
  require_shared(u, w);
  require_shared(u, v);
  const std::size_t n = std::max(joint_support(u, w), v.support());
  BilinearEvaluator eval(u.basis(), n);
  std::vector<double> dual(n);
  eval.apply(u.coeffs(), w.coeffs(), dual);
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += dual[i] * v[i];
  return s;
}

double CutoffSpec::theta(double r) const {
  const double x = std::clamp(r - static_cast<double>(level), 0.0, 1.0);
  return 1.0 - x * x * (3.0 - 2.0 * x);
}

void truncated_Bn(BilinearEvaluator& eval, const CutoffSpec& spec, const SpectralField& u, std::span<double> out) {
  const std::size_t n = eval.active();
  const double th = spec.theta(norm_Uprime(u));
  std::fill(out.begin(), out.end(), 0.0);
  if (th == 0.0) return;
  eval.apply(u.coeffs(), u.coeffs(), out.first(n));
  if (th != 1.0) {
    for (std::size_t i = 0; i < n; ++i) out[i] *= th;
  }
}

SpectralField truncated_Bn(const SpectralField& u, const CutoffSpec& spec) {
  if (u.is_dual()) throw DomainError("truncated_Bn: expects a primal field");
  if (spec.level < 1 || spec.level > u.size()) throw DomainError("truncated_Bn: level out of range");
  if (u.support() > spec.level) throw DomainError("truncated_Bn: field must lie in span(e_1..e_n)");
  BilinearEvaluator eval(u.basis(), spec.level);
  SpectralField out(u.basis(), true);
  truncated_Bn(eval, spec, u, out.coeffs());
  return out;
}

SpectralField random_in_V_sphere(const BasisPtr& basis, std::size_t n, double radius, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  SpectralField x(basis);
  do {
    for (std::size_t i = 0; i < n; ++i) x[i] = g(rng);
  } while (norm_V(x) == 0.0);
  x *= radius / norm_V(x);
  return x;
}

double fit_extension_constant(const BasisPtr& basis, std::size_t samples, std::uint64_t seed, int ascent_steps) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  const std::size_t N = basis->size();
  const auto vm = basis->vm_norms();
  BilinearEvaluator eval(basis, N);
  std::vector<double> u(N), w(N), y(N), z(N);
  auto normalize = [](std::vector<double>& x) {
    const double s = std::sqrt(squared_sum(x));
    if (s > 0.0) {
      for (double& v : x) v /= s;
    }
    return s;
  };
  // |B(u, w)|_{V_m'} with y = B(u, w) on return
  auto value = [&]() {
    eval.apply(u, w, y);
    double s = 0.0;
    for (std::size_t i = 0; i < N; ++i) s += (y[i] / vm[i]) * (y[i] / vm[i]);
    return std::sqrt(s);
  };
  double best = 0.0;
  for (std::size_t s = 0; s < samples; ++s) {
    for (std::size_t i = 0; i < N; ++i) {
      u[i] = g(rng);
      w[i] = g(rng);
    }
    normalize(u);
    normalize(w);
    best = std::max(best, value());
    for (int step = 0; step < ascent_steps; ++step) {
      // w <- -B(u, D^2 B(u, w))
      for (std::size_t i = 0; i < N; ++i) z[i] = y[i] / (vm[i] * vm[i]);
      eval.apply(u, z, w);
      if (normalize(w) == 0.0) break;
      value();
      // u <- S_w^T D^2 S_w u
      for (std::size_t i = 0; i < N; ++i) z[i] = y[i] / (vm[i] * vm[i]);
      eval.apply_adjoint_first(w, z, u);
      if (normalize(u) == 0.0) break;
      best = std::max(best, value());
    }
  }
  return best;
}

int LipschitzAudit::band_of(double radius) {
  if (!(radius > 0.0)) return 0;
  return static_cast<int>(std::ceil(std::log2(radius) - 1e-12));
}

AuditRecord LipschitzAudit::ratio(const SpectralField& u, const SpectralField& v) {
  AuditRecord rec;
  const SpectralField diff = u - v;
  rec.rhs = norm_V(diff);
  rec.band = band_of(std::max(norm_V(u), norm_V(v)));
  if (rec.rhs == 0.0) {
    rec.skipped = true;
    return rec;
  }
  rec.lhs = dual_norm_V(B_diag(u) - B_diag(v));
  return rec;
}

double LipschitzAudit::fit(int band, std::size_t samples, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> rad(0.0, band_radius(band));
  BilinearEvaluator eval(basis_, basis_->size());
  SpectralField bu(basis_, true), bv(basis_, true);
  double best = 0.0;
  for (std::size_t s = 0; s < samples; ++s) {
    const auto u = random_in_V_sphere(basis_, basis_->size(), rad(rng), rng);
    const auto v = random_in_V_sphere(basis_, basis_->size(), rad(rng), rng);
    const double den = norm_V(u - v);
    if (den == 0.0) continue;
    eval.apply(u.coeffs(), u.coeffs(), bu.coeffs());
    eval.apply(v.coeffs(), v.coeffs(), bv.coeffs());
    best = std::max(best, dual_norm_V(bu - bv) / den);
  }
  auto it = std::find_if(constants_.begin(), constants_.end(), [&](const auto& e) { return e.first == band; });
  if (it == constants_.end()) {
    constants_.emplace_back(band, best);
  } else {
    it->second = best;
  }
  return best;
}

std::size_t LipschitzAudit::validate(int band, std::size_t samples, std::uint64_t seed, bool* refitted) {
  if (!has_constant(band)) throw DomainError("LipschitzAudit: band has no fitted constant");
  const double L = constant(band);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> rad(0.0, band_radius(band));
  BilinearEvaluator eval(basis_, basis_->size());
  SpectralField bu(basis_, true), bv(basis_, true);
  std::size_t violations = 0;
  double best = L;
  for (std::size_t s = 0; s < samples; ++s) {
    const auto u = random_in_V_sphere(basis_, basis_->size(), rad(rng), rng);
    const auto v = random_in_V_sphere(basis_, basis_->size(), rad(rng), rng);
    const double den = norm_V(u - v);
    if (den == 0.0) continue;
    eval.apply(u.coeffs(), u.coeffs(), bu.coeffs());
    eval.apply(v.coeffs(), v.coeffs(), bv.coeffs());
    const double lhs = dual_norm_V(bu - bv);
    if (lhs > L * den + kAuditSlack) ++violations;
    best = std::max(best, lhs / den);
  }
  const bool refit = static_cast<double>(violations) > 0.01 * static_cast<double>(samples);
  if (refit) {
    for (auto& e : constants_) {
      if (e.first == band) e.second = best;
    }
  }
  if (refitted) *refitted = refit;
  return violations;
}

bool LipschitzAudit::has_constant(int band) const {
  return std::any_of(constants_.begin(), constants_.end(), [&](const auto& e) { return e.first == band; });
}

double LipschitzAudit::constant(int band) const {
  for (const auto& e : constants_) {
    if (e.first == band) return e.second;
  }
  throw DomainError("LipschitzAudit: band has no fitted constant");
}

AuditRecord LipschitzAudit::audit(const SpectralField& u, const SpectralField& v) const {
  AuditRecord rec = ratio(u, v);
  if (rec.skipped) return rec;
  rec.constant = constant(rec.band);
  rec.satisfied = rec.lhs <= rec.constant * rec.rhs + kAuditSlack;
  return rec;
}

AuditRecord lipschitz_audit_B(const LipschitzAudit& fitted, const SpectralField& u, const SpectralField& v) {
  return fitted.audit(u, v);
}

}  // namespace levyns
