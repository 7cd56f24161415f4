#include "levyns/levy.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "levyns/error.hpp"
#include "levyns/field.hpp"
#include "levyns/quadrature.hpp"

namespace levyns {

MarkSpace MarkSpace::finite(std::vector<Mark> atoms, std::vector<double> weights) {
  if (atoms.empty() || atoms.size() != weights.size()) {
    throw DomainError("MarkSpace::finite: need one weight per atom");
  }
  MarkSpace s;
  s.kind_ = MarkSpaceKind::finite;
  s.dim_ = 3;
  double total = 0.0;
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    if (!(weights[i] >= 0.0) || !std::isfinite(weights[i])) throw DomainError("MarkSpace::finite: bad weight");
    total += weights[i];
    s.cumulative_.push_back(total);
    s.quadrature_.push_back({atoms[i], weights[i]});
  }
  if (!(total > 0.0)) throw DomainError("MarkSpace: intensity measure has zero mass");
  s.atoms_ = std::move(atoms);
  s.mass_ = total;
  return s;
}

MarkSpace MarkSpace::box(int dim, std::array<double, 3> lo, std::array<double, 3> hi,
                         std::function<double(const Mark&)> density, double bound, int quadrature_nodes) {
  if (dim < 1 || dim > 3) throw DomainError("MarkSpace::box: dimension must be 1, 2 or 3");
  for (int c = 0; c < dim; ++c) {
    if (!(lo[c] < hi[c])) throw DomainError("MarkSpace::box: empty box");
  }
  if (!(bound > 0.0)) throw DomainError("MarkSpace::box: density bound must be positive");
  MarkSpace s;
  s.kind_ = MarkSpaceKind::box;
  s.dim_ = dim;
  s.lo_ = lo;
  s.hi_ = hi;
  s.density_ = std::move(density);
  s.bound_ = bound;
  std::vector<QuadratureRule> rules;
  for (int c = 0; c < dim; ++c) rules.push_back(gauss_legendre(quadrature_nodes, lo[c], hi[c]));
  std::size_t total = 1;
  for (int c = 0; c < dim; ++c) total *= rules[c].nodes.size();
  for (std::size_t q = 0; q < total; ++q) {
    std::size_t rest = q;
    WeightedMark wm;
    double w = 1.0;
    for (int c = dim - 1; c >= 0; --c) {
      const std::size_t i = rest % rules[c].nodes.size();
      rest /= rules[c].nodes.size();
      wm.mark.y[c] = rules[c].nodes[i];
      w *= rules[c].weights[i];
    }
    const double rho = s.density_(wm.mark);
    if (rho < 0.0 || rho > bound * (1.0 + 1e-12)) throw DomainError("MarkSpace::box: density outside [0, bound]");
    wm.weight = w * rho;
    s.mass_ += wm.weight;
    s.quadrature_.push_back(wm);
  }
  if (!(s.mass_ > 0.0)) throw DomainError("MarkSpace: intensity measure has zero mass");
  return s;
}

MarkSpace MarkSpace::uniform_box(int dim, std::array<double, 3> lo, std::array<double, 3> hi, double total_mass) {
  double vol = 1.0;
  for (int c = 0; c < dim; ++c) vol *= hi[c] - lo[c];
  if (!(total_mass > 0.0)) throw DomainError("MarkSpace: intensity measure has zero mass");
  const double rho = total_mass / vol;
  return box(dim, lo, hi, [rho](const Mark&) { return rho; }, rho, 4);
}

MarkSpace MarkSpace::power_law(double alpha, double scale, double eps, double ymax) {
  if (!(alpha > 0.0) || !(scale > 0.0) || !(eps > 0.0) || !(ymax > eps)) {
    throw DomainError("MarkSpace::power_law: need alpha, scale > 0 and 0 < eps < ymax");
  }
  MarkSpace s;
  s.kind_ = MarkSpaceKind::power_law;
  s.dim_ = 1;
  s.alpha_ = alpha;
  s.scale_ = scale;
  s.eps_ = eps;
  s.ymax_ = ymax;
  s.mass_ = scale * (std::pow(eps, -alpha) - std::pow(ymax, -alpha)) / alpha;
  const QuadratureRule rule = gauss_legendre(24, std::log(eps), std::log(ymax));
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
    WeightedMark wm;
    wm.mark.y[0] = std::exp(rule.nodes[i]);
    wm.weight = rule.weights[i] * scale * std::exp(-alpha * rule.nodes[i]);
    s.quadrature_.push_back(wm);
  }
  std::ostringstream note;
  note << "sigma-finite intensity truncated to [" << eps << ", " << ymax << "]; jumps below " << eps
       << " and their compensator are discarded";
  s.note_ = note.str();
  return s;
}

double MarkSpace::measure(const Box& A) const {
  switch (kind_) {
    case MarkSpaceKind::finite: {
      double m = 0.0;
      for (std::size_t i = 0; i < atoms_.size(); ++i) {
        bool inside = true;
        for (int c = 0; c < 3; ++c) inside = inside && atoms_[i].y[c] >= A.lo[c] && atoms_[i].y[c] < A.hi[c];
        if (inside) m += quadrature_[i].weight;
      }
      return m;
    }
    case MarkSpaceKind::box: {
      std::array<double, 3> lo{}, hi{};
      for (int c = 0; c < dim_; ++c) {
        lo[c] = std::max(lo_[c], A.lo[c]);
        hi[c] = std::min(hi_[c], A.hi[c]);
        if (!(lo[c] < hi[c])) return 0.0;
      }
      return box(dim_, lo, hi, density_, bound_, 16).mass();
    }
    case MarkSpaceKind::power_law: {
      const double a = std::max(eps_, A.lo[0]);
      const double b = std::min(ymax_, A.hi[0]);
      if (!(a < b)) return 0.0;
      return scale_ * (std::pow(a, -alpha_) - std::pow(b, -alpha_)) / alpha_;
    }
  }
  return 0.0;
}

Mark MarkSpace::sample(std::mt19937_64& rng) const {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  switch (kind_) {
    case MarkSpaceKind::finite: {
      const double u = unif(rng) * mass_;
      auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
      const auto i = std::min<std::size_t>(static_cast<std::size_t>(it - cumulative_.begin()), atoms_.size() - 1);
      return atoms_[i];
    }
    case MarkSpaceKind::box: {
      for (;;) {
        Mark m;
        for (int c = 0; c < dim_; ++c) m.y[c] = lo_[c] + (hi_[c] - lo_[c]) * unif(rng);
        if (unif(rng) * bound_ <= density_(m)) return m;
      }
    }
    case MarkSpaceKind::power_law: {
      const double a = std::pow(eps_, -alpha_);
      const double b = std::pow(ymax_, -alpha_);
      Mark m;
      m.y[0] = std::pow(a - unif(rng) * (a - b), -1.0 / alpha_);
      return m;
    }
  }
  return {};
}

double MarkSpace::moment(double p) const {
  if (kind_ == MarkSpaceKind::power_law) {
    const double e = p - alpha_;
    if (std::abs(e) < 1e-14) return scale_ * std::log(ymax_ / eps_);
    return scale_ * (std::pow(ymax_, e) - std::pow(eps_, e)) / e;
  }
  double m = 0.0;
  for (const auto& wm : quadrature_) m += wm.weight * std::pow(std::abs(wm.mark.value()), p);
  return m;
}

std::string MarkSpace::describe() const {
  std::ostringstream os;
  switch (kind_) {
    case MarkSpaceKind::finite:
      os << "finite(" << atoms_.size() << " atoms)";
      break;
    case MarkSpaceKind::box:
      os << "box(dim " << dim_ << ")";
      break;
    case MarkSpaceKind::power_law:
      os << "power_law(alpha " << alpha_ << ")";
      break;
  }
  os << " mass " << mass_;
  return os.str();
}

std::size_t JumpStream::count_in(double a, double b) const {
  auto lo = std::upper_bound(times.begin(), times.end(), a);
  auto hi = std::upper_bound(times.begin(), times.end(), b);
  return static_cast<std::size_t>(hi - lo);
}

void JumpStream::write_csv(std::ostream& os) const {
  os << "t,y1,y2,y3\n" << std::setprecision(17);
  for (std::size_t j = 0; j < times.size(); ++j) {
    os << times[j] << ',' << marks[j].y[0] << ',' << marks[j].y[1] << ',' << marks[j].y[2] << '\n';
  }
}

JumpStream sample_jumps(const MarkSpace& space, double T, std::uint64_t seed) {
  if (!(T > 0.0)) throw DomainError("sample_jumps: horizon must be positive");
  if (!(space.mass() > 0.0)) throw DomainError("sample_jumps: intensity measure has zero mass");
  std::mt19937_64 rng(seed);
  JumpStream js;
  js.horizon = T;
  js.seed = seed;
  std::poisson_distribution<std::size_t> count(T * space.mass());
  const std::size_t n = count(rng);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  js.times.resize(n);
  for (double& t : js.times) t = T * (1.0 - unif(rng));  // in (0, T]
  std::sort(js.times.begin(), js.times.end());
  for (std::size_t j = 1; j < n; ++j) {
    if (js.times[j] <= js.times[j - 1]) js.times[j] = std::nextafter(js.times[j - 1], T + 1.0);
  }
  js.marks.reserve(n);
  for (std::size_t j = 0; j < n; ++j) js.marks.push_back(space.sample(rng));
  return js;
}

std::vector<double> compensated_integral(const Integrand& xi, std::size_t dim, const JumpStream& jumps,
                                         const MarkSpace& space, double t_end, std::size_t time_steps) {
  if (time_steps < 1) throw DomainError("compensated_integral: need at least one time step");
  std::vector<double> total(dim, 0.0), buf(dim);
  for (std::size_t j = 0; j < jumps.size() && jumps.times[j] <= t_end; ++j) {
    xi(jumps.times[j], jumps.marks[j], buf);
    for (std::size_t i = 0; i < dim; ++i) total[i] += buf[i];
  }
  const double h = t_end / static_cast<double>(time_steps);
  for (std::size_t s = 0; s < time_steps; ++s) {
    const double tm = (static_cast<double>(s) + 0.5) * h;
    for (const auto& wm : space.quadrature()) {
      xi(tm, wm.mark, buf);
      for (std::size_t i = 0; i < dim; ++i) total[i] -= h * wm.weight * buf[i];
    }
  }
  for (double v : total) {
    if (!std::isfinite(v)) throw IntegrationFailure("compensated_integral: non-finite compensator", 0.0);
  }
  return total;
}

std::vector<double> wiener_increments(const WienerConfig& cfg) {
  if (cfg.modes < 1) throw DomainError("wiener_increments: need at least one mode");
  if (!(cfg.dt > 0.0)) throw DomainError("wiener_increments: dt must be positive");
  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> g(0.0, std::sqrt(cfg.dt));
  std::vector<double> out(cfg.steps * cfg.modes);
  for (double& v : out) v = g(rng);
  return out;
}

const char* to_string(NoisePreset p) {
  switch (p) {
    case NoisePreset::linear_multiplicative:
      return "linear-multiplicative";
    case NoisePreset::gradient_multiplicative:
      return "gradient-multiplicative";
    case NoisePreset::additive:
      return "additive";
  }
  return "?";
}

NoisePreset noise_preset_from_string(const std::string& name) {
  for (auto p : {NoisePreset::linear_multiplicative, NoisePreset::gradient_multiplicative, NoisePreset::additive}) {
    if (name == to_string(p)) return p;
  }
  throw DomainError("unknown noise preset '" + name + "'");
}

double DeclaredConstants::growth(double p) const {
  if (p == 2.0) return C2;
  if (p == 4.0) return C4;
  if (p == 4.0 + gamma) return C4g;
  if (p == 8.0 + 2.0 * gamma) return C8g;
  throw DomainError("DeclaredConstants: no growth constant for this exponent");
}

NoiseCoefficients::NoiseCoefficients(BasisPtr basis, NoisePreset preset, double sigma_F, double sigma_G,
                                     std::size_t wiener_modes, double gamma)
    : basis_(std::move(basis)), preset_(preset), sigma_F_(sigma_F), sigma_G_(sigma_G), K_(wiener_modes),
      gamma_(gamma) {
  if (K_ < 1) throw DomainError("NoiseCoefficients: need at least one Wiener mode");
  if (!(gamma_ > 0.0)) throw DomainError("NoiseCoefficients: gamma must be positive");
  if (preset_ == NoisePreset::additive && K_ > basis_->size()) {
    throw DomainError("NoiseCoefficients: additive preset needs K <= N Wiener modes");
  }
}

DeclaredConstants NoiseCoefficients::derived_constants(const MarkSpace& space) const {
  DeclaredConstants c;
  c.gamma = gamma_;
  const auto ps = c.exponents();
  double* growth[4] = {&c.C2, &c.C4, &c.C4g, &c.C8g};
  for (int i = 0; i < 4; ++i) *growth[i] = std::pow(std::abs(sigma_F_), ps[i]) * space.moment(ps[i]);
  const double s2 = sigma_G_ * sigma_G_;
  switch (preset_) {
    case NoisePreset::linear_multiplicative:
      c.L = sigma_F_ * sigma_F_ * space.moment(2.0);
      c.a = 2.0;
      c.lambda = s2;
      c.kappa = 0.0;
      c.C_G = s2;
      c.L_G = s2;
      break;
    case NoisePreset::gradient_multiplicative:
      c.L = sigma_F_ * sigma_F_ * space.moment(2.0);
      c.a = 2.0 - s2;
      c.lambda = 0.0;
      c.kappa = 0.0;
      c.C_G = s2;
      c.L_G = s2;
      break;
    case NoisePreset::additive:
      c.L = 0.0;
      c.a = 2.0;
      c.lambda = 0.0;
      c.kappa = static_cast<double>(K_) * s2;
      c.C_G = c.kappa;
      c.L_G = 0.0;
      break;
  }
  return c;
}

void NoiseCoefficients::F(double, std::span<const double> u, const Mark& y, std::span<double> out) const {
  const double s = sigma_F_ * y.value();
  if (preset_ == NoisePreset::additive) {
    std::fill(out.begin(), out.end(), 0.0);
    out[0] = s;
    return;
  }
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = s * u[i];
}

void NoiseCoefficients::G(double, std::span<const double> u, std::size_t l, std::span<double> out) const {
  const std::size_t n = out.size();
  switch (preset_) {
    case NoisePreset::linear_multiplicative: {
      const double s = sigma_G_ / std::sqrt(static_cast<double>(K_));
      for (std::size_t i = 0; i < n; ++i) out[i] = s * u[i];
      return;
    }
    case NoisePreset::gradient_multiplicative: {
      // d/dx1 of sqrt(2) cos(k.x) p is -k1 sqrt(2) sin(k.x) p and vice versa;
      // cos and sin partners are adjacent in the basis.
      const double s = sigma_G_ / std::sqrt(static_cast<double>(K_));
      for (std::size_t i = 0; i < n; ++i) {
        const Mode& m = basis_->mode(i);
        const double k1 = m.k.k[0];
        if (m.parity == Parity::cosine) {
          out[i] = i + 1 < n ? s * k1 * u[i + 1] : 0.0;
        } else {
          out[i] = -s * k1 * u[i - 1];
        }
      }
      return;
    }
    case NoisePreset::additive:
      std::fill(out.begin(), out.end(), 0.0);
      if (l < n) out[l] = sigma_G_;
      return;
  }
}

void NoiseCoefficients::compensator(double t, std::span<const double> u, const MarkSpace& space,
                                    std::span<double> out) const {
  std::fill(out.begin(), out.end(), 0.0);
  std::vector<double> buf(out.size());
  for (const auto& wm : space.quadrature()) {
    F(t, u, wm.mark, buf);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += wm.weight * buf[i];
  }
}

double NoiseCoefficients::hs_norm2(double t, std::span<const double> u) const {
  std::vector<double> col(u.size());
  double s = 0.0;
  for (std::size_t l = 0; l < K_; ++l) {
    G(t, u, l, col);
    s += squared_sum(col);
  }
  return s;
}

bool NoiseAudit::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const AuditCheck& c) { return c.passed; });
}

void NoiseAudit::throw_if_failed() const {
  for (const auto& c : checks) {
    if (!c.passed) {
      throw AssumptionFailure(assumption + " violated: " + c.name + " (lhs " + std::to_string(c.worst_lhs) +
                              ", rhs " + std::to_string(c.worst_rhs) + "; witness " + c.witness + ")");
    }
  }
}

namespace {

bool within(double lhs, double bound) { return lhs <= bound * (1.0 + 1e-12) + 1e-12; }

void record(AuditCheck& check, double lhs, double bound, double scale, const std::string& witness) {
  const bool ok = within(lhs, bound);
  const double ratio = scale > 0.0 ? lhs / scale : (lhs > 0.0 ? INFINITY : 0.0);
  if (!ok && check.passed) {
    check.passed = false;
    check.worst_lhs = lhs;
    check.worst_rhs = bound;
    check.witness = witness;
  } else if (check.passed && ratio >= check.worst_ratio) {
    check.worst_lhs = lhs;
    check.worst_rhs = bound;
    check.witness = witness;
  }
  check.worst_ratio = std::max(check.worst_ratio, ratio);
}

}  // namespace

NoiseAudit validate_F(const NoiseCoefficients& coeffs, const MarkSpace& space, const DeclaredConstants& declared,
                      std::span<const std::vector<double>> samples) {
  NoiseAudit audit;
  audit.assumption = "jump coefficient F";
  AuditCheck lip{"Lipschitz: int |F(u1) - F(u2)|^2 dnu <= L |u1 - u2|^2"};
  std::vector<AuditCheck> growth;
  for (double p : declared.exponents()) {
    std::ostringstream name;
    name << "growth p=" << p << ": int |F(u)|^p dnu <= C_p (1 + |u|^p)";
    growth.push_back({name.str()});
  }
  AuditCheck side{"side condition: nu{y : F(t, u; y) = 0} = 0"};

  const double t = 0.0;
  const auto& quad = space.quadrature();
  std::vector<double> f1, f2;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto& u = samples[i];
    f1.resize(u.size());
    f2.resize(u.size());
    const double un = std::sqrt(squared_sum(u));
    const auto ps = declared.exponents();
    std::array<double, 4> integrals{};
    double null_mass = 0.0;
    for (const auto& wm : quad) {
      coeffs.F(t, u, wm.mark, f1);
      const double fn = std::sqrt(squared_sum(f1));
      for (int k = 0; k < 4; ++k) integrals[k] += wm.weight * std::pow(fn, ps[k]);
      if (fn == 0.0) null_mass += wm.weight;
    }
    for (int k = 0; k < 4; ++k) {
      const double rhs = 1.0 + std::pow(un, ps[k]);
      record(growth[k], integrals[k], declared.growth(ps[k]) * rhs, rhs, "u = sample " + std::to_string(i));
    }
    if (un > 0.0) record(side, null_mass, 0.0, space.mass(), "u = sample " + std::to_string(i));

    for (std::size_t j = i + 1; j < samples.size(); ++j) {
      const auto& v = samples[j];
      double diff2 = 0.0;
      for (std::size_t k = 0; k < u.size(); ++k) diff2 += (u[k] - v[k]) * (u[k] - v[k]);
      if (diff2 == 0.0) continue;
      double lhs = 0.0;
      for (const auto& wm : quad) {
        coeffs.F(t, u, wm.mark, f1);
        coeffs.F(t, v, wm.mark, f2);
        double d2 = 0.0;
        for (std::size_t k = 0; k < u.size(); ++k) d2 += (f1[k] - f2[k]) * (f1[k] - f2[k]);
        lhs += wm.weight * d2;
      }
      record(lip, lhs, declared.L * diff2, diff2,
             "(u1, u2) = samples (" + std::to_string(i) + ", " + std::to_string(j) + ")");
    }
  }
  audit.checks.push_back(lip);
  for (auto& g : growth) audit.checks.push_back(g);
  audit.checks.push_back(side);
  return audit;
}

NoiseAudit validate_G_coercivity(const NoiseCoefficients& coeffs, const DeclaredConstants& declared,
                                 std::span<const std::vector<double>> samples) {
  NoiseAudit audit;
  audit.assumption = "Wiener coefficient G";
  const double g = declared.gamma;
  AuditCheck range{"coercivity constant a in (2 - 2/(3+gamma), 2], gamma > 0"};
  range.worst_lhs = declared.a;
  range.worst_rhs = 2.0 - 2.0 / (3.0 + g);
  range.passed = g > 0.0 && declared.a > 2.0 - 2.0 / (3.0 + g) && declared.a <= 2.0;
  if (!range.passed) range.witness = "declared a = " + std::to_string(declared.a);
  audit.checks.push_back(range);

  AuditCheck coer{"2<Au,u> - ||G(u)||_HS^2 >= a ||u||^2 - lambda |u|^2 - kappa"};
  AuditCheck growth{"||G(u)||^2_HS(V') <= C_G (1 + |u|^2)"};
  const auto& basis = *coeffs.basis();
  std::vector<double> col;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto& u = samples[i];
    col.resize(u.size());
    const double h2 = squared_sum(u);
    const double g2 = weighted_squared_sum(u, basis.eigenvalues().first(u.size()));
    double hs = 0.0, hs_vprime = 0.0;
    for (std::size_t l = 0; l < coeffs.wiener_modes(); ++l) {
      coeffs.G(0.0, u, l, col);
      for (std::size_t k = 0; k < col.size(); ++k) {
        hs += col[k] * col[k];
        hs_vprime += col[k] * col[k] / (1.0 + basis.eigenvalues()[k]);
      }
    }
    const double lhs = 2.0 * g2 - hs;
    const double rhs = declared.a * g2 - declared.lambda * h2 - declared.kappa;
    // lhs >= rhs, recorded as (rhs - lhs) <= 0
    const double gap = rhs - lhs;
    const double ok_tol = 1e-12 * std::max({1.0, std::abs(lhs), std::abs(rhs)});
    if (gap > ok_tol) {
      if (coer.passed) {
        coer.worst_lhs = lhs;
        coer.worst_rhs = rhs;
        coer.witness = "u = sample " + std::to_string(i);
      }
      coer.passed = false;
    }
    coer.worst_ratio = std::max(coer.worst_ratio, gap);
    record(growth, hs_vprime, declared.C_G * (1.0 + h2), 1.0 + h2, "u = sample " + std::to_string(i));
  }
  audit.checks.push_back(coer);
  audit.checks.push_back(growth);
  return audit;
}

}  // namespace levyns
