#include <doctest.h>

#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include "levyns/error.hpp"
#include "levyns/grid.hpp"
#include "levyns/levy.hpp"
#include "levyns/random.hpp"
#include "test_util.hpp"

using namespace levyns;

namespace {

struct Stats {
  double mean = 0.0, var = 0.0;
  std::size_t n = 0;
  void add(double x) {
    ++n;
    const double d = x - mean;
    mean += d / static_cast<double>(n);
    var += d * (x - mean);
  }
  double variance() const { return n > 1 ? var / static_cast<double>(n - 1) : 0.0; }
  double sem() const { return std::sqrt(variance() / static_cast<double>(n)); }
};

MarkSpace two_atoms() {
  Mark a, b;
  a.y[0] = 0.5;
  b.y[0] = -1.0;
  return MarkSpace::finite({a, b}, {1.5, 0.5});
}

}  // namespace

TEST_CASE("Poisson event counts have mean T nu(Y)") {
  auto space = two_atoms();
  REQUIRE(space.mass() == 2.0);
  Stats s;
  for (std::uint64_t seed = 0; seed < 10000; ++seed) s.add(static_cast<double>(sample_jumps(space, 1.0, seed).size()));
  CHECK(std::abs(s.mean - 2.0) <= 3.0 * std::sqrt(2.0) / 100.0);
}

TEST_CASE("intensity of a sub-box and independence of disjoint windows") {
  auto space = MarkSpace::uniform_box(2, {0.0, 0.0, 0.0}, {1.0, 2.0, 0.0}, 3.0);
  Box A;
  A.lo = {0.0, 0.5, -1.0};
  A.hi = {0.5, 1.5, 1.0};
  const double nuA = space.measure(A);
  CHECK(nuA == doctest::Approx(0.75).epsilon(1e-12));
  const double t = 0.6;
  const std::size_t samples = 10000;
  Stats inA, w1, w2;
  double cross = 0.0;
  std::vector<double> c1, c2;
  for (std::uint64_t seed = 0; seed < samples; ++seed) {
    auto js = sample_jumps(space, 1.0, derive_seed(seed, kJumpStream));
    double k = 0.0;
    for (std::size_t j = 0; j < js.size(); ++j) {
      const auto& y = js.marks[j].y;
      if (js.times[j] <= t && y[0] >= A.lo[0] && y[0] < A.hi[0] && y[1] >= A.lo[1] && y[1] < A.hi[1]) k += 1.0;
    }
    inA.add(k);
    c1.push_back(static_cast<double>(js.count_in(0.0, 0.4)));
    c2.push_back(static_cast<double>(js.count_in(0.4, 1.0)));
    w1.add(c1.back());
    w2.add(c2.back());
  }
  CHECK(std::abs(inA.mean - t * nuA) <= 3.0 * inA.sem());
  for (std::size_t i = 0; i < samples; ++i) cross += (c1[i] - w1.mean) * (c2[i] - w2.mean);
  const double corr = cross / static_cast<double>(samples - 1) / std::sqrt(w1.variance() * w2.variance());
  CHECK(std::abs(corr) < 3.0 / std::sqrt(static_cast<double>(samples)));
}

TEST_CASE("jump streams: ordering, determinism and CSV") {
  auto space = two_atoms();
  auto a = sample_jumps(space, 5.0, 42);
  auto b = sample_jumps(space, 5.0, 42);
  REQUIRE(a.size() == b.size());
  for (std::size_t j = 0; j < a.size(); ++j) {
    CHECK(a.times[j] == b.times[j]);
    CHECK(a.marks[j].y == b.marks[j].y);
    if (j > 0) CHECK(a.times[j] > a.times[j - 1]);
    CHECK(a.times[j] > 0.0);
    CHECK(a.times[j] <= 5.0);
  }
  std::ostringstream os;
  a.write_csv(os);
  CHECK(os.str().rfind("t,y1,y2,y3\n", 0) == 0);
  CHECK_THROWS_AS(sample_jumps(space, 0.0, 1), DomainError);
  CHECK_THROWS_AS(MarkSpace::finite({Mark{}}, {0.0}), DomainError);
}

TEST_CASE("box mark space with a density: mass, sub-box measure and sampling") {
  // density 2 y0 on [0,1]: mass 1, nu([0, 1/2)) = 1/4
  auto space = MarkSpace::box(1, {0.0, 0.0, 0.0}, {1.0, 0.0, 0.0}, [](const Mark& m) { return 2.0 * m.y[0]; }, 2.0);
  CHECK(space.mass() == doctest::Approx(1.0).epsilon(1e-12));
  Box half;
  half.lo = {0.0, 0.0, 0.0};
  half.hi = {0.5, 0.0, 0.0};
  CHECK(space.measure(half) == doctest::Approx(0.25).epsilon(1e-12));
  std::mt19937_64 rng(3);
  Stats below;
  for (int i = 0; i < 20000; ++i) below.add(space.sample(rng).y[0] < 0.5 ? 1.0 : 0.0);
  CHECK(std::abs(below.mean - 0.25) <= 3.0 * below.sem());
  CHECK(space.moment(1.0) == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("truncated power law: closed-form mass, moments and sampler") {
  auto space = MarkSpace::power_law(0.5, 1.0, 0.01, 2.0);
  const double mass = (std::pow(0.01, -0.5) - std::pow(2.0, -0.5)) / 0.5;
  CHECK(space.mass() == doctest::Approx(mass).epsilon(1e-14));
  CHECK_FALSE(space.truncation_note().empty());
  double qmass = 0.0, q2 = 0.0;
  for (const auto& wm : space.quadrature()) {
    qmass += wm.weight;
    q2 += wm.weight * wm.mark.value() * wm.mark.value();
  }
  CHECK(qmass == doctest::Approx(mass).epsilon(1e-8));
  CHECK(q2 == doctest::Approx(space.moment(2.0)).epsilon(1e-8));
  std::mt19937_64 rng(9);
  Stats y;
  for (int i = 0; i < 40000; ++i) y.add(space.sample(rng).value());
  CHECK(std::abs(y.mean - space.moment(1.0) / mass) <= 3.0 * y.sem());
  Box A;
  A.lo[0] = 0.5;
  A.hi[0] = 10.0;
  CHECK(space.measure(A) == doctest::Approx((std::pow(0.5, -0.5) - std::pow(2.0, -0.5)) / 0.5).epsilon(1e-14));
}

TEST_CASE("compensated integrals are mean zero and satisfy the isometry") {
  auto space = two_atoms();
  const double T = 1.0;
  auto zero = compensated_integral([](double, const Mark&, std::span<double> o) { o[0] = o[1] = 0.0; }, 2,
                                   sample_jumps(space, T, 1), space, T);
  CHECK(zero[0] == 0.0);
  // mark-dependent integrand xi(s, y) = (y0, 2 y0^2)
  Integrand xi = [](double, const Mark& m, std::span<double> o) {
    o[0] = m.value();
    o[1] = 2.0 * m.value() * m.value();
  };
  double energy = 0.0;
  for (const auto& wm : space.quadrature()) {
    const double y = wm.mark.value();
    energy += wm.weight * (y * y + 4.0 * y * y * y * y);
  }
  energy *= T;
  Stats m0, sq;
  for (std::uint64_t seed = 0; seed < 10000; ++seed) {
    auto v = compensated_integral(xi, 2, sample_jumps(space, T, seed), space, T);
    m0.add(v[0]);
    sq.add(v[0] * v[0] + v[1] * v[1]);
  }
  CHECK(std::abs(m0.mean) <= 3.0 * m0.sem());
  CHECK(std::abs(sq.mean - energy) <= 3.0 * sq.sem());
}

TEST_CASE("compensator time quadrature is exact for piecewise-constant integrands") {
  auto space = two_atoms();
  JumpStream empty;
  empty.horizon = 1.0;
  Integrand step = [](double t, const Mark&, std::span<double> o) { o[0] = t < 0.5 ? 1.0 : 3.0; };
  auto v = compensated_integral(step, 1, empty, space, 1.0, 2);
  CHECK(v[0] == doctest::Approx(-space.mass() * (0.5 + 1.5)).epsilon(1e-15));
}

TEST_CASE("Wiener increments: variance, independence, determinism") {
  WienerConfig cfg{2, 0.01, 50000, 77};
  auto w = wiener_increments(cfg);
  REQUIRE(w.size() == 100000);
  Stats v0, cross;
  for (std::size_t s = 0; s < cfg.steps; ++s) {
    v0.add(w[2 * s] * w[2 * s]);
    cross.add(w[2 * s] * w[2 * s + 1]);
  }
  Stats all;
  for (double x : w) all.add(x * x);
  CHECK(std::abs(all.mean - cfg.dt) <= 3.0 * all.sem());
  CHECK(std::abs(cross.mean) <= 3.0 * cross.sem());
  auto again = wiener_increments(cfg);
  CHECK(std::equal(w.begin(), w.end(), again.begin()));
  CHECK_THROWS_AS(wiener_increments({0, 0.1, 1, 0}), DomainError);
}

TEST_CASE("gradient preset applies d/dx1 exactly") {
  auto b = build_basis(2, 4);
  const double beta = 0.6;
  NoiseCoefficients g(b, NoisePreset::gradient_multiplicative, 0.0, beta, 1);
  std::mt19937_64 rng(5);
  auto u = testutil::random_field(b, rng);
  SpectralField du(b);
  g.G(0.0, u.coeffs(), 0, du.coeffs());
  const int M = 9;
  SpectralGrid grid(b, b->size(), M);
  std::vector<double> grad(4 * grid.points()), phys(2 * grid.points());
  grid.synthesize_gradient(u.coeffs(), grad);
  grid.synthesize(du.coeffs(), phys);
  double worst = 0.0;
  for (int c = 0; c < 2; ++c)
    for (std::size_t p = 0; p < grid.points(); ++p)
      worst = std::max(worst, std::abs(phys[c * grid.points() + p] - beta * grad[(c * 2 + 0) * grid.points() + p]));
  CHECK(worst < 1e-12);
}

TEST_CASE("validate_F on presets") {
  auto b = build_basis(2, 3);
  auto space = two_atoms();
  std::mt19937_64 rng(6);
  std::vector<std::vector<double>> samples;
  for (int i = 0; i < 12; ++i) {
    auto u = testutil::random_field(b, rng);
    samples.emplace_back(u.coeffs().begin(), u.coeffs().end());
  }
  samples.push_back(samples.front());

  NoiseCoefficients lin(b, NoisePreset::linear_multiplicative, 0.7, 0.3, 1);
  auto declared = lin.derived_constants(space);
  const double sigma2 = 0.49 * space.moment(2.0);
  CHECK(declared.L == doctest::Approx(sigma2));
  auto audit = validate_F(lin, space, declared, samples);
  CHECK(audit.passed());
  CHECK(audit.checks[0].worst_ratio <= sigma2 * (1.0 + 1e-12));
  CHECK(audit.checks[0].worst_ratio == doctest::Approx(sigma2).epsilon(1e-12));
  CHECK_NOTHROW(audit.throw_if_failed());

  auto tight = declared;
  tight.L *= 0.5;
  auto bad = validate_F(lin, space, tight, samples);
  CHECK_FALSE(bad.passed());
  CHECK_FALSE(bad.checks[0].witness.empty());
  CHECK_THROWS_AS(bad.throw_if_failed(), AssumptionFailure);

  NoiseCoefficients none(b, NoisePreset::linear_multiplicative, 0.0, 0.3, 1);
  auto zero = validate_F(none, space, none.derived_constants(space), samples);
  CHECK_FALSE(zero.checks.back().passed);
  CHECK_FALSE(zero.passed());

  NoiseCoefficients add(b, NoisePreset::additive, 0.4, 0.2, 3);
  CHECK(validate_F(add, space, add.derived_constants(space), samples).passed());
}

TEST_CASE("validate_G_coercivity on presets") {
  auto b = build_basis(2, 4);
  std::mt19937_64 rng(7);
  std::vector<std::vector<double>> samples;
  for (int i = 0; i < 50; ++i) {
    auto u = testutil::random_field(b, rng);
    samples.emplace_back(u.coeffs().begin(), u.coeffs().end());
  }
  samples.emplace_back(b->size(), 0.0);
  for (std::size_t i = 0; i < b->size(); ++i) {
    samples.emplace_back(b->size(), 0.0);
    samples.back()[i] = 1.0;
  }
  auto space = two_atoms();

  NoiseCoefficients lin(b, NoisePreset::linear_multiplicative, 0.5, 0.8, 1);
  auto c = lin.derived_constants(space);
  CHECK(c.a == 2.0);
  CHECK(c.lambda == doctest::Approx(0.64));
  CHECK(c.kappa == 0.0);
  CHECK(validate_G_coercivity(lin, c, samples).passed());

  for (double beta : {0.3, 0.6}) {
    NoiseCoefficients grad(b, NoisePreset::gradient_multiplicative, 0.5, beta, 1);
    auto dc = grad.derived_constants(space);
    CHECK(dc.a == doctest::Approx(2.0 - beta * beta));
    auto ok = validate_G_coercivity(grad, dc, samples);
    CHECK(ok.checks[1].passed);
    CHECK(ok.passed() == (beta * beta < 0.5));
    auto greedy = dc;
    greedy.a = 2.0 - beta * beta + 0.05;
    CHECK_FALSE(validate_G_coercivity(grad, greedy, samples).checks[1].passed);
  }

  NoiseCoefficients add(b, NoisePreset::additive, 0.5, 0.3, 4);
  auto ac = add.derived_constants(space);
  CHECK(ac.kappa == doctest::Approx(4 * 0.09));
  CHECK(validate_G_coercivity(add, ac, samples).passed());
  auto negative = ac;
  negative.kappa = -0.01;
  const std::vector<std::vector<double>> origin{std::vector<double>(b->size(), 0.0)};
  CHECK_FALSE(validate_G_coercivity(add, negative, origin).passed());
}
