#include <doctest.h>

#include <cmath>
#include <random>

#include "levyns/error.hpp"
#include "levyns/galerkin.hpp"
#include "levyns/path_analysis.hpp"
#include "test_util.hpp"

using namespace levyns;

namespace {

RealCadlagPath step(std::vector<double> t, std::vector<double> v, double T = 1.0) {
  return RealCadlagPath(std::move(t), std::move(v), T);
}

// Random step path on a dyadic time grid so that gaps tie with delta.
RealCadlagPath random_step(std::mt19937_64& rng, std::size_t max_breaks, double T = 1.0) {
  std::uniform_int_distribution<int> count(0, static_cast<int>(max_breaks));
  std::uniform_int_distribution<int> slot(1, 15);
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<double> t{0.0};
  const int n = count(rng);
  for (int k = 0; k < n; ++k) t.push_back(T * slot(rng) / 16.0);
  std::sort(t.begin(), t.end());
  t.erase(std::unique(t.begin(), t.end()), t.end());
  std::vector<double> v;
  for (std::size_t k = 0; k < t.size(); ++k) v.push_back(g(rng));
  return step(t, v, T);
}

}  // namespace

TEST_CASE("modulus of one and two jumps") {
  auto u = MetricPath::from_real(step({0.0, 0.5}, {0.0, 1.0}));
  CHECK(modulus(u, 0.25) == 0.0);
  CHECK(modulus(u, 0.5) == 0.0);
  CHECK(modulus(u, 0.6) == 1.0);

  auto w = MetricPath::from_real(step({0.0, 0.3, 0.5}, {0.0, 1.0, 3.0}));
  CHECK(modulus(w, 0.2) == 0.0);
  CHECK(modulus(w, 0.25) == 1.0);
  CHECK(modulus(w, 0.55) == 3.0);
  CHECK_THROWS_AS(modulus(w, 0.0), DomainError);
  CHECK_THROWS_AS(modulus(w, 1.5), DomainError);
}

TEST_CASE("modulus of a sampled ramp is delta - h") {
  const int n = 1000;
  std::vector<double> t, v;
  for (int k = 0; k < n; ++k) {
    t.push_back(k / static_cast<double>(n));
    v.push_back(k / static_cast<double>(n));
  }
  auto u = MetricPath::from_real(step(t, v));
  for (int parts : {2, 5, 10, 20}) {
    const double delta = 1.0 / parts;
    CHECK(std::abs(modulus(u, delta) - (delta - 1.0 / n)) < 1e-12);
  }
}

TEST_CASE("modulus dynamic program equals exhaustive search") {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<int> dslot(1, 16);
  for (int trial = 0; trial < 1000; ++trial) {
    auto u = MetricPath::from_real(random_step(rng, 12));
    const double delta = dslot(rng) / 16.0;
    REQUIRE(modulus(u, delta) == modulus_bruteforce(u, delta));
  }
}

TEST_CASE("modulus curve is monotone in delta") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    auto u = MetricPath::from_real(random_step(rng, 14));
    const auto curve = modulus_curve(u, {1.0 / 32, 0.5, 1.0 / 8, 1.0 / 4, 1.0 / 16, 1.0});
    REQUIRE(curve.front().delta == 1.0);
    for (std::size_t k = 1; k < curve.size(); ++k) {
      CHECK(curve[k].delta < curve[k - 1].delta);
      CHECK(curve[k].w <= curve[k - 1].w);
    }
    CHECK(curve.front().w == doctest::Approx(u.diameter()));
  }
}

TEST_CASE("skorokhod distance between shifted single jumps") {
  const double T = 1.0;
  for (auto [a, b] : {std::pair{0.5, 0.52}, std::pair{0.3, 0.2}, std::pair{0.1, 0.9}}) {
    const auto u = step({0.0, a}, {0.0, 1.0}, T), v = step({0.0, b}, {0.0, 1.0}, T);
    const double matched =
        std::abs(a - b) + std::max(std::abs(std::log(b / a)), std::abs(std::log((T - b) / (T - a))));
    CHECK(skorokhod_distance(u, v) == doctest::Approx(std::min(1.0, matched)).epsilon(1e-14));
  }
  const auto u = step({0.0, 0.4}, {0.0, 2.0});
  CHECK(skorokhod_distance(u, u) == 0.0);
}

TEST_CASE("skorokhod dynamic program: exhaustive agreement and symmetry") {
  std::mt19937_64 rng(3);
  SkorokhodOptions all;
  all.nearest = 0;
  for (int trial = 0; trial < 300; ++trial) {
    auto u = MetricPath::from_real(random_step(rng, 3));
    auto v = MetricPath::from_real(random_step(rng, 3));
    const double d = skorokhod_distance(u, v, all);
    REQUIRE(d == skorokhod_bruteforce(u, v, all));
    REQUIRE(d == skorokhod_distance(v, u, all));
    CHECK(d <= skorokhod_distance(u, v, SkorokhodOptions{1}));
  }
}

TEST_CASE("weak projection and the weak ball metric") {
  auto b = build_basis(2, 3);
  const std::size_t n = 4;
  CadlagPath p(b, n, 1.0, false), q(b, n, 1.0, false);
  p.add_constant_record(0.0, EventKind::grid, std::vector<double>{1.0, 0.0, 0.0, 0.0});
  p.add_constant_record(0.5, EventKind::jump, std::vector<double>{0.0, 0.5, 0.0, 0.0});
  q.add_constant_record(0.0, EventKind::grid, std::vector<double>{1.0, 0.0, 0.0, 0.0});
  SpectralField h(b);
  h[0] = 2.0;
  h[1] = -1.0;
  const auto proj = weak_projection_path(p, h);
  CHECK(proj.value_at(0.2) == 2.0);
  CHECK(proj.value_at(0.7) == -0.5);

  const std::vector<double> x{1.0, 0.0}, y{0.0, 0.5, 0.0, 3.0};
  CHECK(weak_ball_q(x, y) == doctest::Approx(0.5 * 0.5 + 0.25 * (0.5 / 1.5) + 0.0625 * 0.75));
  // No knot can be matched: the identity gives the sup of q.
  CHECK(weak_ball_metric(p, q, 1.0) == doctest::Approx(weak_ball_q(std::vector<double>{0.0, 0.5},
                                                                    std::vector<double>{1.0, 0.0})));
  CHECK(weak_ball_metric(p, p, 1.0) == 0.0);
  CHECK_THROWS_AS(weak_ball_metric(p, q, 0.9), DomainError);
}

TEST_CASE("wilson interval and quantiles") {
  const auto ci = wilson_interval(5, 10, 1.96);
  CHECK(ci.lo == doctest::Approx(0.2366).epsilon(1e-3));
  CHECK(ci.hi == doctest::Approx(0.7634).epsilon(1e-3));
  CHECK(wilson_interval(0, 10, 1.96).lo == 0.0);
  CHECK(quantile({4.0, 1.0, 3.0, 2.0}, 0.5) == 2.5);
  CHECK(quantile({4.0, 1.0, 3.0, 2.0}, 1.0) == 4.0);
}

TEST_CASE("aldous estimate on a Poisson counting process") {
  const double mu = 2.0, T = 1.0, tau = 0.25;
  std::mt19937_64 rng(17);
  std::vector<MetricPath> paths;
  for (int m = 0; m < 4000; ++m) {
    std::exponential_distribution<double> gap(mu);
    std::vector<double> t{0.0}, v{0.0};
    for (double s = gap(rng); s < T; s += gap(rng)) {
      t.push_back(s);
      v.push_back(v.back() + 1.0);
    }
    paths.push_back(MetricPath::from_real(step(t, v, T)));
  }
  StoppingRule rule;
  rule.time = tau;
  const std::vector<double> thetas{0.4, 0.05, 0.1, 0.2, 0.9};
  const std::vector<double> etas{1.0};
  const auto rows = aldous_estimate(paths, rule, thetas, etas);
  REQUIRE(rows.size() == 5);
  double prev = 0.0;
  for (const auto& r : rows) {
    const double exact = 1.0 - std::exp(-mu * std::min(r.theta, T - tau));
    const double sd = std::sqrt(exact * (1.0 - exact) / r.paths);
    CHECK(std::abs(r.probability - exact) < 4.0 * sd);
    CHECK(r.wilson_lo <= r.probability);
    CHECK(r.probability <= r.wilson_hi);
    CHECK(r.theta >= prev);
    CHECK(r.sup_probability >= r.probability);
    CHECK(r.excess_mass == (tau + r.theta > T ? 1.0 : 0.0));
    prev = r.theta;
  }

  StoppingRule hit;
  hit.kind = StoppingRule::Kind::hitting;
  hit.level = 1.0;
  auto one = MetricPath::from_real(step({0.0, 0.3, 0.6}, {0.0, 1.0, 2.0}));
  CHECK(hit.tau(one) == 0.3);
  hit.level = 5.0;
  CHECK(hit.tau(one) == 1.0);
}

TEST_CASE("tightness report on deterministic heat decay") {
  auto b = build_basis(2, 3);
  GalerkinConfig cfg;
  cfg.basis = b;
  cfg.level = b->size();
  cfg.T = 1.0;
  cfg.dt = 1.0 / 16.0;
  cfg.u0.assign(b->size(), 0.0);
  cfg.nonlinear = cfg.use_forcing = cfg.jumps = cfg.wiener = false;
  std::mt19937_64 rng(2);
  auto u0 = testutil::random_field(b, rng);
  cfg.u0.assign(u0.coeffs().begin(), u0.coeffs().end());
  std::vector<CadlagPath> paths{simulate_path(cfg)};

  double lq = 0.0;
  for (std::size_t i = 0; i < b->size(); ++i) {
    const double lam = b->eigenvalues()[i];
    lq += (1.0 + lam) * u0[i] * u0[i] * (-std::expm1(-2.0 * lam)) / (2.0 * lam);
  }
  TightnessOptions opt;
  opt.deltas = {0.5, 0.25, 0.125, 1.0 / 64};
  const auto rep = tightness_report(paths, opt);
  CHECK(rep.sup_H == doctest::Approx(norm_H(u0)).epsilon(1e-14));
  CHECK(rep.lq_V == doctest::Approx(lq).epsilon(1e-12));
  CHECK(rep.monotone);
  CHECK(rep.quantile.back().w < 0.1);
  CHECK(rep.verdict);

  opt.q = 3.0;
  const auto rep3 = tightness_report(paths, opt);
  CHECK(rep3.lq_V > 0.0);
  opt.sup_bound = 0.5 * norm_H(u0);
  CHECK_FALSE(tightness_report(paths, opt).verdict);
}

TEST_CASE("skorokhod distance of constants and the uniform bound") {
  CHECK(skorokhod_distance(step({0.0}, {1.5}), step({0.0}, {-0.25})) == 1.75);
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 200; ++trial) {
    auto u = MetricPath::from_real(random_step(rng, 6));
    auto v = MetricPath::from_real(random_step(rng, 6));
    double uniform = 0.0;
    std::vector<double> grid(u.times().begin(), u.times().end());
    grid.insert(grid.end(), v.times().begin(), v.times().end());
    for (double t : grid) uniform = std::max(uniform, u.metric()(u.state(u.index_at(t)), v.state(v.index_at(t))));
    const double d = skorokhod_distance(u, v);
    CHECK(d <= uniform);
    CHECK(std::abs(d - skorokhod_distance(v, u)) <= 1e-9);
  }
}

TEST_CASE("weak projection is linear and recovers coefficient traces") {
  auto b = build_basis(2, 3);
  GalerkinConfig cfg;
  cfg.basis = b;
  cfg.level = 6;
  cfg.T = 1.0;
  cfg.dt = 0.125;
  std::mt19937_64 rng(6);
  auto u0 = testutil::random_field(b, rng, 6);
  cfg.u0.assign(u0.coeffs().begin(), u0.coeffs().end());
  cfg.nonlinear = cfg.use_forcing = cfg.jumps = cfg.wiener = false;
  const auto path = simulate_path(cfg);
  SpectralField e2(b);
  e2[2] = 1.0;
  const auto trace = weak_projection_path(path, e2);
  for (std::size_t r = 0; r < path.record_count(); ++r) CHECK(trace.value_at(path.time(r)) == path.state(r)[2]);
  SpectralField far(b);
  far[b->size() - 1] = 1.0;
  const auto orth = weak_projection_path(path, far);
  for (double v : orth.values()) CHECK(v == 0.0);
  for (int k = 0; k < 20; ++k) {
    auto h1 = testutil::random_field(b, rng), h2 = testutil::random_field(b, rng);
    SpectralField mix(b);
    for (std::size_t i = 0; i < b->size(); ++i) mix[i] = 2.0 * h1[i] - 0.5 * h2[i];
    const auto p1 = weak_projection_path(path, h1), p2 = weak_projection_path(path, h2);
    const auto pm = weak_projection_path(path, mix);
    for (std::size_t r = 0; r < pm.values().size(); ++r) {
      CHECK(std::abs(pm.values()[r] - (2.0 * p1.values()[r] - 0.5 * p2.values()[r])) <= 1e-12);
    }
  }
}

TEST_CASE("weak ball metric of e_1 against zero") {
  const std::vector<double> e1{1.0, 0.0, 0.0}, zero{0.0};
  CHECK(weak_ball_q(e1, zero) == 0.25);
}

TEST_CASE("frozen dynamics: Aldous probabilities vanish and tightness is trivial") {
  auto b = build_basis(2, 3);
  GalerkinConfig cfg;
  cfg.basis = b;
  cfg.level = 6;
  cfg.T = 1.0;
  cfg.dt = 0.125;
  cfg.stokes = cfg.nonlinear = cfg.use_forcing = cfg.jumps = cfg.wiener = false;
  std::mt19937_64 rng(10);
  std::vector<CadlagPath> paths;
  for (int m = 0; m < 5; ++m) {
    auto u0 = testutil::random_field(b, rng, 6);
    cfg.u0.assign(u0.coeffs().begin(), u0.coeffs().end());
    paths.push_back(simulate_path(cfg));
  }
  TightnessOptions opt;
  opt.deltas = {0.5, 0.1};
  opt.thetas = {0.1, 0.3};
  opt.etas = {1e-6};
  opt.rule.time = 0.2;
  const auto rep = tightness_report(paths, opt);
  REQUIRE(rep.aldous.size() == 2);
  for (const auto& r : rep.aldous) CHECK(r.probability == 0.0);
  for (const auto& q : rep.quantile) CHECK(q.w == 0.0);
  CHECK(rep.verdict);
}

TEST_CASE("tightness: an isolated jump does not spoil the modulus") {
  auto b = build_basis(2, 3);
  CadlagPath p(b, 3, 1.0, false);
  p.add_constant_record(0.0, EventKind::grid, std::vector<double>{0.0, 0.0, 0.0});
  p.add_constant_record(0.4, EventKind::jump, std::vector<double>{1.0, 0.0, 0.0});
  TightnessOptions opt;
  opt.deltas = {0.9, 0.3, 0.05};
  const auto rep = tightness_report(std::span<const CadlagPath>(&p, 1), opt);
  CHECK(rep.quantile.front().w == 1.0);
  CHECK(rep.quantile.back().w == 0.0);
  CHECK(rep.verdict);
}

TEST_CASE("weak ball metric to a fine reference shrinks with the level") {
  auto b = build_basis(2, 5);
  auto marks = [] {
    Mark a;
    a.y[0] = 0.6;
    return std::make_shared<const MarkSpace>(MarkSpace::finite({a}, {2.0}));
  }();
  auto config = [&](std::size_t n) {
    GalerkinConfig cfg;
    cfg.basis = b;
    cfg.level = n;
    cfg.T = 1.0;
    cfg.dt = 1.0 / 32.0;
    cfg.u0.assign(b->size(), 0.0);
    for (std::size_t i = 0; i < b->size(); ++i) cfg.u0[i] = 1.0 / (1.0 + b->eigenvalues()[i]);
    cfg.nonlinear = true;
    cfg.use_forcing = false;
    cfg.jumps = true;
    cfg.wiener = false;
    cfg.noise = std::make_shared<const NoiseCoefficients>(b, NoisePreset::additive, 0.3, 0.0, 1);
    cfg.marks = marks;
    return cfg;
  };
  double trend = 0.0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto ref = simulate_path(config(32), sample_noise(config(32), seed), seed);
    const double r = 1.0 + std::max(ref.sup_norm_H(), 10.0);
    std::vector<double> d;
    for (std::size_t n : {4u, 8u, 16u}) {
      const auto cfg = config(n);
      d.push_back(weak_ball_metric(simulate_path(cfg, sample_noise(cfg, seed), seed), ref, r));
    }
    CHECK(d[1] <= d[0]);
    CHECK(d[2] <= d[1]);
    trend += d[0] - d[2];
  }
  CHECK(trend > 0.0);
}
