#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "levyns/error.hpp"
#include "levyns/operators.hpp"
#include "test_util.hpp"

using namespace levyns;

namespace {

// Brute-force b(u, w, v) by direct summation of modes and their analytic
// gradients on a uniform grid with `per_axis` points.
double b_oracle(const SpectralField& u, const SpectralField& w, const SpectralField& v, int per_axis) {
  const BasisTable& t = u.table();
  const int d = t.dim();
  std::size_t npts = 1;
  for (int c = 0; c < d; ++c) npts *= static_cast<std::size_t>(per_axis);
  double total = 0.0;
  std::array<double, 3> x{};
  for (std::size_t p = 0; p < npts; ++p) {
    std::size_t rest = p;
    for (int c = d - 1; c >= 0; --c) {
      x[c] = 2.0 * std::numbers::pi * static_cast<double>(rest % per_axis) / per_axis;
      rest /= per_axis;
    }
    std::array<double, 3> uu{}, vv{};
    std::array<std::array<double, 3>, 3> gw{};
    for (std::size_t i = 0; i < t.size(); ++i) {
      const Mode& m = t.mode(i);
      double phase = 0.0;
      for (int c = 0; c < d; ++c) phase += m.k.k[c] * x[c];
      const bool cosine = m.parity == Parity::cosine;
      const double val = std::sqrt(2.0) * (cosine ? std::cos(phase) : std::sin(phase));
      const double der = std::sqrt(2.0) * (cosine ? -std::sin(phase) : std::cos(phase));
      for (int c = 0; c < d; ++c) {
        uu[c] += u[i] * val * m.unit_polarization[c];
        vv[c] += v[i] * val * m.unit_polarization[c];
        for (int j = 0; j < d; ++j) gw[c][j] += w[i] * der * m.k.k[j] * m.unit_polarization[c];
      }
    }
    for (int c = 0; c < d; ++c)
      for (int j = 0; j < d; ++j) total += uu[j] * gw[c][j] * vv[c];
  }
  return total / static_cast<double>(npts);
}

}  // namespace

TEST_CASE("stokes_apply multiplies by eigenvalues") {
  auto b = build_basis(2, 4);
  auto e1 = SpectralField::unit(b, 0);
  auto a = stokes_apply(e1);
  CHECK(a.is_dual());
  CHECK(a[0] == 1.0);
  auto z = stokes_apply(SpectralField(b));
  for (double c : z.coeffs()) CHECK(c == 0.0);
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 100; ++trial) {
    auto u = testutil::random_field(b, rng);
    auto v = testutil::random_field(b, rng);
    auto au = stokes_apply(u);
    double direct = 0.0, cross = 0.0;
    for (std::size_t i = 0; i < b->size(); ++i) {
      direct += b->eigenvalues()[i] * u[i] * u[i];
      cross += b->eigenvalues()[i] * u[i] * v[i];
    }
    const double g = seminorm_grad(u);
    CHECK(std::abs(inner(au, u) - direct) <= 1e-12 * direct);
    CHECK(std::abs(g * g - direct) <= 1e-12 * direct);
    CHECK(inner(au, v) == cross);
    CHECK(dual_norm_V(au) <= g);
  }
  CHECK_THROWS_AS(stokes_apply(a), DomainError);
}

TEST_CASE("trilinear form agrees with a fine-grid quadrature oracle") {
  auto b = build_basis(2, 2);
  std::mt19937_64 rng(2);
  const int fine = 4 * SpectralGrid::dealiased_size(b->max_wavenumber(b->size()));
  for (int trial = 0; trial < 5; ++trial) {
    auto u = testutil::random_field(b, rng);
    auto w = testutil::random_field(b, rng);
    auto v = testutil::random_field(b, rng);
    const double oracle = b_oracle(u, w, v, fine);
    CHECK(std::abs(trilinear_b(u, w, v) - oracle) <= 1e-8 * std::max(1.0, std::abs(oracle)));
  }
  // a specific nonzero low-mode triad in 2D
  auto e = [&](std::size_t i) { return SpectralField::unit(b, i); };
  double found = 0.0;
  for (std::size_t i = 0; i < b->size(); ++i)
    for (std::size_t j = 0; j < b->size(); ++j)
      for (std::size_t k = 0; k < b->size(); ++k) {
        const double val = trilinear_b(e(i), e(j), e(k));
        CHECK(std::abs(val - b_oracle(e(i), e(j), e(k), fine)) <= 1e-12);
        found = std::max(found, std::abs(val));
      }
  CHECK(found > 0.1);
}

TEST_CASE("dealiasing: high triads match the oracle, under-resolved grids are rejected") {
  auto b = build_basis(2, 4);
  const int K = b->max_wavenumber(b->size());
  std::mt19937_64 rng(3);
  // modes of the outer shell only: |k_u + k_w + k_v|_inf reaches 3K, beyond the 2K+1 grid Nyquist
  SpectralField u(b), w(b), v(b);
  std::normal_distribution<double> g;
  for (std::size_t i = 0; i < b->size(); ++i) {
    if (b->mode(i).k.max_abs() < K - 1) continue;
    u[i] = g(rng);
    w[i] = g(rng);
    v[i] = g(rng);
  }
  const double oracle = b_oracle(u, w, v, 4 * (3 * K + 1));
  CHECK(std::abs(trilinear_b(u, w, v) - oracle) <= 1e-10 * std::max(1.0, std::abs(oracle)));
  CHECK_THROWS_AS(BilinearEvaluator(b, b->size(), 2 * K + 1), DomainError);
}

TEST_CASE("property: antisymmetry and cancellation in 2D and 3D") {
  std::mt19937_64 rng(4);
  for (int d : {2, 3}) {
    auto b = build_basis(d, d == 2 ? 6 : 2);
    for (int trial = 0; trial < 30; ++trial) {
      auto u = testutil::random_field(b, rng);
      auto w = testutil::random_field(b, rng);
      auto v = testutil::random_field(b, rng);
      const double scale = norm_V(u) * norm_V(v) * norm_V(w);
      CHECK(std::abs(trilinear_b(u, w, v) + trilinear_b(u, v, w)) <= 1e-10 * scale);
      CHECK(std::abs(trilinear_b(u, v, v)) <= 1e-10 * norm_V(u) * norm_V(v) * norm_V(v));
      CHECK(std::abs(inner(B_op(u, v), v)) <= 1e-10 * norm_V(u) * norm_V(v) * norm_V(v));
    }
  }
}

TEST_CASE("B_op pairs against every retained mode") {
  auto b = build_basis(2, 3);
  std::mt19937_64 rng(5);
  auto u = testutil::random_field(b, rng);
  auto w = testutil::random_field(b, rng);
  auto B = B_op(u, w);
  CHECK(B.is_dual());
  for (std::size_t i = 0; i < b->size(); ++i) {
    CHECK(B[i] == doctest::Approx(trilinear_b(u, w, SpectralField::unit(b, i))).epsilon(1e-12));
  }
  auto zero = B_op(SpectralField(b), w);
  for (double c : zero.coeffs()) CHECK(c == 0.0);
}

TEST_CASE("extension constant fit is stable across independent samples") {
  auto b = build_basis(2, 4);
  const double c1 = fit_extension_constant(b, 100, 1);
  const double c2 = fit_extension_constant(b, 100, 2);
  CHECK(c1 > 0.0);
  CHECK(std::abs(c1 - c2) <= 0.1 * std::max(c1, c2));
}

TEST_CASE("cutoff profile") {
  CutoffSpec spec{3};
  CHECK(spec.theta(0.0) == 1.0);
  CHECK(spec.theta(3.0) == 1.0);
  CHECK(spec.theta(4.0) == 0.0);
  CHECK(spec.theta(10.0) == 0.0);
  CHECK(spec.theta(3.5) == doctest::Approx(0.5));
  double prev = 1.0;
  for (double r = 2.5; r <= 4.5; r += 0.01) {
    const double t = spec.theta(r);
    CHECK(t <= prev);
    CHECK(t >= 0.0);
    CHECK(t <= 1.0);
    prev = t;
  }
}

TEST_CASE("truncated_Bn in the two saturated regions") {
  auto b = build_basis(2, 4);
  const std::size_t n = 8;
  CutoffSpec spec{n};
  std::mt19937_64 rng(6);
  auto u = testutil::random_field(b, rng, n);
  REQUIRE(norm_Uprime(u) <= static_cast<double>(n));
  auto bn = truncated_Bn(u, spec);
  auto full = project_Pn(B_diag(u), n);
  for (std::size_t i = 0; i < b->size(); ++i) CHECK(bn[i] == doctest::Approx(full[i]).epsilon(1e-13));
  auto big = ((n + 1.5) / norm_Uprime(u)) * u;
  auto zero = truncated_Bn(big, spec);
  for (double c : zero.coeffs()) CHECK(c == 0.0);
  CHECK_THROWS_AS(truncated_Bn(testutil::random_field(b, rng), spec), DomainError);
}

TEST_CASE("truncated_Bn is globally Lipschitz in H on a ball") {
  auto b = build_basis(2, 3);
  const std::size_t n = b->size();
  CutoffSpec spec{n};
  BilinearEvaluator eval(b, n);
  std::vector<double> bu(n), bv(n);
  auto ratio_sample = [&](std::uint64_t seed, std::size_t count) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> rad(0.0, 2.0);
    double worst = 0.0;
    for (std::size_t s = 0; s < count; ++s) {
      auto u = random_in_V_sphere(b, n, rad(rng), rng);
      auto v = random_in_V_sphere(b, n, rad(rng), rng);
      truncated_Bn(eval, spec, u, bu);
      truncated_Bn(eval, spec, v, bv);
      double num = 0.0;
      for (std::size_t i = 0; i < n; ++i) num += (bu[i] - bv[i]) * (bu[i] - bv[i]);
      worst = std::max(worst, std::sqrt(num) / norm_H(u - v));
    }
    return worst;
  };
  const double L1 = ratio_sample(1, 1000);
  const double L2 = ratio_sample(2, 1000);
  CHECK(std::isfinite(L1));
  CHECK(L2 <= 1.5 * L1);
}

TEST_CASE("Lipschitz audit of B: skip, fit/validate, band bookkeeping") {
  auto b = build_basis(2, 3);
  LipschitzAudit audit(b);
  std::mt19937_64 rng(7);
  auto u = random_in_V_sphere(b, b->size(), 0.8, rng);
  auto same = LipschitzAudit::ratio(u, u);
  CHECK(same.skipped);

  const double L0 = audit.fit(0, 200, 11);
  CHECK(L0 > 0.0);
  bool refit = false;
  const std::size_t violations = audit.validate(0, 100, 12, &refit);
  CHECK(violations <= (refit ? 100u : 1u));
  if (refit) CHECK(audit.constant(0) >= L0);

  auto v = random_in_V_sphere(b, b->size(), 0.5, rng);
  auto rec = lipschitz_audit_B(audit, u, v);
  CHECK(rec.band == 0);
  CHECK(rec.satisfied);

  const double L1 = audit.fit(1, 200, 13);
  auto rec2 = lipschitz_audit_B(audit, 2.0 * u, 2.0 * v);
  CHECK(rec2.band == 1);
  CHECK(rec2.constant == L1);
  CHECK(LipschitzAudit::band_of(1.0) == 0);
  CHECK(LipschitzAudit::band_of(1.5) == 1);
  CHECK(LipschitzAudit::band_of(2.0) == 1);
}

TEST_CASE("adjoint of the first slot") {
  auto b = build_basis(2, 3);
  std::mt19937_64 rng(9);
  BilinearEvaluator eval(b, b->size());
  std::vector<double> out(b->size());
  for (int trial = 0; trial < 20; ++trial) {
    auto u = testutil::random_field(b, rng);
    auto w = testutil::random_field(b, rng);
    auto z = testutil::random_field(b, rng);
    eval.apply_adjoint_first(w.coeffs(), z.coeffs(), out);
    double pairing = 0.0;
    for (std::size_t i = 0; i < b->size(); ++i) pairing += out[i] * u[i];
    const double ref = trilinear_b(u, w, z);
    CHECK(std::abs(pairing - ref) <= 1e-11 * std::max(1.0, std::abs(ref)));
  }
}
