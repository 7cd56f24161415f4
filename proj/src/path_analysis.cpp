#include "levyns/path_analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <utility>

#include "levyns/error.hpp"
#include "levyns/kernels.hpp"

namespace levyns {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Gaps within this fraction of T count as >= delta (sample times are rounded).
constexpr double kGapSlack = 1e-12;

std::vector<double> sample_times(const CadlagPath& path, double h) {
  std::vector<double> t(path.times().begin(), path.times().end());
  if (h > 0.0) {
    const double T = path.horizon();
    for (std::size_t k = 0;; ++k) {
      const double s = static_cast<double>(k) * h;
      if (s > T) break;
      t.push_back(s);
    }
    t.push_back(T);
  }
  std::sort(t.begin(), t.end());
  t.erase(std::unique(t.begin(), t.end()), t.end());
  return t;
}

std::vector<std::vector<double>> sample_states(const CadlagPath& path, std::span<const double> times,
                                               std::size_t width) {
  std::vector<std::vector<double>> states(times.size(), std::vector<double>(width, 0.0));
  for (std::size_t k = 0; k < times.size(); ++k) {
    std::span<double> dst(states[k].data(), path.level());
    path.state_at(times[k], dst);
  }
  return states;
}

double h_norm(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v * v;
  return std::sqrt(s);
}

}  // namespace

RealCadlagPath::RealCadlagPath(std::vector<double> times, std::vector<double> values, double horizon)
    : times_(std::move(times)), values_(std::move(values)), horizon_(horizon) {
  if (times_.empty() || times_.size() != values_.size()) throw DomainError("RealCadlagPath: times/values mismatch");
  if (times_.front() != 0.0) throw DomainError("RealCadlagPath: first time must be 0");
  if (!(horizon_ > 0.0) || times_.back() > horizon_) throw DomainError("RealCadlagPath: times exceed horizon");
  for (std::size_t k = 1; k < times_.size(); ++k) {
    if (!(times_[k] > times_[k - 1])) throw DomainError("RealCadlagPath: times must be strictly increasing");
  }
}

double RealCadlagPath::value_at(double t) const {
  auto it = std::upper_bound(times_.begin(), times_.end(), t);
  const auto k = it == times_.begin() ? 0 : static_cast<std::size_t>(it - times_.begin()) - 1;
  return values_[k];
}

StateMetric euclidean_metric() {
  return [](std::span<const double> x, std::span<const double> y) {
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) s += (x[i] - y[i]) * (x[i] - y[i]);
    return std::sqrt(s);
  };
}

StateMetric weighted_metric(std::vector<double> weights) {
  return [w = std::move(weights)](std::span<const double> x, std::span<const double> y) {
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double d = w[i] * (x[i] - y[i]);
      s += d * d;
    }
    return std::sqrt(s);
  };
}

MetricPath::MetricPath(std::vector<double> times, std::vector<std::vector<double>> states, double horizon,
                       StateMetric metric)
    : horizon_(horizon), metric_(std::move(metric)) {
  if (times.empty() || times.size() != states.size()) throw DomainError("MetricPath: times/states mismatch");
  if (times.front() != 0.0) throw DomainError("MetricPath: first time must be 0");
  if (!(horizon > 0.0) || times.back() > horizon) throw DomainError("MetricPath: times exceed horizon");
  const std::size_t width = states.front().size();
  for (std::size_t k = 0; k < times.size(); ++k) {
    if (states[k].size() != width) throw DomainError("MetricPath: ragged states");
    if (k > 0 && times[k] < times[k - 1]) throw DomainError("MetricPath: times must be nondecreasing");
    if (k + 1 < times.size() && times[k + 1] == times[k]) continue;
    times_.push_back(times[k]);
    states_.push_back(std::move(states[k]));
  }
  const std::vector<double> zero(width, 0.0);
  levels_.reserve(states_.size());
  for (const auto& s : states_) levels_.push_back(metric_(s, zero));
}

MetricPath MetricPath::from_real(const RealCadlagPath& u) {
  std::vector<std::vector<double>> states;
  for (double v : u.values()) states.push_back({v});
  return MetricPath({u.times().begin(), u.times().end()}, std::move(states), u.horizon(), euclidean_metric());
}

MetricPath MetricPath::from_galerkin_H(const CadlagPath& path, double h) {
  auto times = sample_times(path, h);
  auto states = sample_states(path, times, path.level());
  return MetricPath(std::move(times), std::move(states), path.horizon(), euclidean_metric());
}

MetricPath MetricPath::from_galerkin_Uprime(const CadlagPath& path, double h) {
  auto times = sample_times(path, h);
  auto states = sample_states(path, times, path.level());
  std::vector<double> levels;
  for (const auto& s : states) levels.push_back(h_norm(s));
  const auto r = path.basis()->u_radii();
  MetricPath out(std::move(times), std::move(states), path.horizon(),
                 weighted_metric({r.begin(), r.begin() + static_cast<long>(path.level())}));
  out.set_levels(std::move(levels));
  return out;
}

std::size_t MetricPath::index_at(double t) const {
  auto it = std::upper_bound(times_.begin(), times_.end(), t);
  return it == times_.begin() ? 0 : static_cast<std::size_t>(it - times_.begin()) - 1;
}

double MetricPath::diameter() const {
  double best = 0.0;
  for (std::size_t i = 0; i < size(); ++i) {
    for (std::size_t j = i + 1; j < size(); ++j) best = std::max(best, distance(i, j));
  }
  return best;
}

std::vector<double> default_candidates(const MetricPath& u) {
  std::vector<double> c(u.times().begin(), u.times().end());
  c.push_back(u.horizon());
  c.erase(std::unique(c.begin(), c.end()), c.end());
  return c;
}

namespace {

std::vector<double> checked_candidates(const MetricPath& u, double delta, std::span<const double> candidates) {
  if (!(delta > 0.0)) throw DomainError("modulus: delta must be positive");
  if (delta > u.horizon()) throw DomainError("modulus: delta exceeds the horizon");
  std::vector<double> c(candidates.begin(), candidates.end());
  std::sort(c.begin(), c.end());
  c.erase(std::unique(c.begin(), c.end()), c.end());
  if (c.size() < 2 || c.front() != 0.0 || c.back() != u.horizon()) {
    throw DomainError("modulus: candidates must contain 0 and T");
  }
  return c;
}

// Sample range visited on [a, b): the sample active at a through the last
// sample strictly before b.
std::pair<std::size_t, std::size_t> segment_range(const MetricPath& u, double a, double b) {
  const auto ts = u.times();
  const std::size_t lo = u.index_at(a);
  const auto it = std::lower_bound(ts.begin(), ts.end(), b);
  const std::size_t hi = std::max(lo, static_cast<std::size_t>(it - ts.begin()) - 1);
  return {lo, hi};
}

class DiameterTable {
 public:
  static constexpr std::size_t kMaxTable = 4096;

  explicit DiameterTable(const MetricPath& u) : u_(u), n_(u.size()) {
    if (n_ > kMaxTable) return;
    table_.assign(n_ * n_, 0.0);
    for (std::size_t len = 1; len < n_; ++len) {
      for (std::size_t lo = 0; lo + len < n_; ++lo) {
        const std::size_t hi = lo + len;
        table_[lo * n_ + hi] =
            std::max({table_[(lo + 1) * n_ + hi], table_[lo * n_ + hi - 1], u_.distance(lo, hi)});
      }
    }
  }

  double operator()(std::size_t lo, std::size_t hi) const {
    if (!table_.empty()) return table_[lo * n_ + hi];
    double best = 0.0;
    for (std::size_t i = lo; i <= hi; ++i) {
      for (std::size_t j = i + 1; j <= hi; ++j) best = std::max(best, u_.distance(i, j));
    }
    return best;
  }

 private:
  const MetricPath& u_;
  std::size_t n_;
  std::vector<double> table_;
};

double modulus_dp(const MetricPath& u, double delta, const std::vector<double>& c, const DiameterTable& diam) {
  const std::size_t K = c.size();
  std::vector<std::size_t> lo(K), hi(K);
  for (std::size_t i = 0; i < K; ++i) {
    lo[i] = u.index_at(c[i]);
    if (i > 0) hi[i] = segment_range(u, c[0], c[i]).second;
  }
  const double gap = delta - kGapSlack * u.horizon();
  std::vector<double> best(K, kInf);
  best[0] = 0.0;
  for (std::size_t j = 1; j < K; ++j) {
    // Largest i with c_j - c_i >= delta.
    std::size_t i = j;
    while (i > 0 && c[j] - c[i - 1] < gap) --i;
    if (i == 0) continue;
    double current = kInf;
    for (std::size_t k = i; k-- > 0;) {
      const double osc = diam(lo[k], std::max(lo[k], hi[j]));
      if (osc >= current) break;
      current = std::min(current, std::max(best[k], osc));
    }
    best[j] = current;
  }
  return best[K - 1];
}

}  // namespace

double modulus(const MetricPath& u, double delta) { return modulus(u, delta, default_candidates(u)); }

double modulus(const MetricPath& u, double delta, std::span<const double> candidates) {
  const auto c = checked_candidates(u, delta, candidates);
  const DiameterTable diam(u);
  return modulus_dp(u, delta, c, diam);
}

double modulus_bruteforce(const MetricPath& u, double delta) {
  return modulus_bruteforce(u, delta, default_candidates(u));
}

double modulus_bruteforce(const MetricPath& u, double delta, std::span<const double> candidates) {
  const auto c = checked_candidates(u, delta, candidates);
  const std::size_t interior = c.size() - 2;
  if (interior > 14) throw DomainError("modulus_bruteforce: more than 14 interior candidates");
  const double gap = delta - kGapSlack * u.horizon();
  double best = kInf;
  std::vector<double> cut;
  for (std::uint32_t mask = 0; mask < (1u << interior); ++mask) {
    cut.assign(1, c.front());
    for (std::size_t b = 0; b < interior; ++b) {
      if (mask & (1u << b)) cut.push_back(c[b + 1]);
    }
    cut.push_back(c.back());
    bool admissible = true;
    for (std::size_t s = 0; s + 1 < cut.size(); ++s) admissible = admissible && cut[s + 1] - cut[s] >= gap;
    if (!admissible) continue;
    double worst = 0.0;
    for (std::size_t s = 0; s + 1 < cut.size(); ++s) {
      const auto [lo, hi] = segment_range(u, cut[s], cut[s + 1]);
      for (std::size_t i = lo; i <= hi; ++i) {
        for (std::size_t j = i + 1; j <= hi; ++j) worst = std::max(worst, u.distance(i, j));
      }
    }
    best = std::min(best, worst);
  }
  return best;
}

ModulusCurve modulus_curve(const MetricPath& u, std::vector<double> deltas) {
  std::sort(deltas.begin(), deltas.end(), std::greater<>());
  const auto c = default_candidates(u);
  const DiameterTable diam(u);
  ModulusCurve curve;
  for (double d : deltas) curve.push_back({d, modulus_dp(u, d, checked_candidates(u, d, c), diam)});
  return curve;
}

// ---------------------------------------------------------------- Skorokhod

namespace {

struct Knot {
  double s = 0.0;
  double t = 0.0;
};

struct Cost {
  double rho = 0.0;
  double shift = 0.0;
  double slope = 0.0;
  double total() const { return rho + shift + slope; }
};

class SkorokhodProblem {
 public:
  SkorokhodProblem(const MetricPath& u, const MetricPath& v, const SkorokhodOptions& opt) : u_(u), v_(v) {
    if (u.horizon() != v.horizon()) throw DomainError("skorokhod_distance: paths have different horizons");
    T_ = u.horizon();
    const auto bu = breaks(u), bv = breaks(v);
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    for (std::size_t a = 0; a < bu.size(); ++a) {
      for (std::size_t b : nearest(bu[a], bv, opt.nearest)) pairs.emplace_back(a, b);
    }
    for (std::size_t b = 0; b < bv.size(); ++b) {
      for (std::size_t a : nearest(bv[b], bu, opt.nearest)) pairs.emplace_back(a, b);
    }
    std::sort(pairs.begin(), pairs.end());
    pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());
    knots_.push_back({0.0, 0.0});
    for (auto [a, b] : pairs) knots_.push_back({bu[a], bv[b]});
    knots_.push_back({T_, T_});
  }

  std::size_t knot_count() const { return knots_.size(); }
  const Knot& knot(std::size_t k) const { return knots_[k]; }
  bool precedes(std::size_t p, std::size_t q) const {
    return knots_[p].s < knots_[q].s && knots_[p].t < knots_[q].t;
  }

  // Componentwise cost of the linear piece between two knots.
  Cost edge(std::size_t p, std::size_t q) const {
    const Knot a = knots_[p], b = knots_[q];
    Cost c;
    c.shift = std::max(std::abs(a.s - a.t), std::abs(b.s - b.t));
    c.slope = std::abs(std::log(b.t - a.t) - std::log(b.s - a.s));
    const double du = b.s - a.s, dv = b.t - a.t;
    const auto tu = u_.times(), tv = v_.times();
    std::size_t iu = u_.index_at(a.s), iv = v_.index_at(a.t);
    std::size_t nu = iu + 1, nv = iv + 1;
    double rho = u_.metric()(u_.state(iu), v_.state(iv));
    while (true) {
      const bool has_u = nu < tu.size() && tu[nu] < b.s;
      const bool has_v = nv < tv.size() && tv[nv] < b.t;
      if (!has_u && !has_v) break;
      const double ku = has_u ? (tu[nu] - a.s) * dv : kInf;
      const double kv = has_v ? (tv[nv] - a.t) * du : kInf;
      if (ku <= kv) iu = nu++;
      if (kv <= ku) iv = nv++;
      rho = std::max(rho, u_.metric()(u_.state(iu), v_.state(iv)));
    }
    if (q + 1 == knots_.size()) {
      rho = std::max(rho, u_.metric()(u_.state(u_.size() - 1), v_.state(v_.size() - 1)));
    }
    c.rho = rho;
    return c;
  }

 private:
  static std::vector<double> breaks(const MetricPath& x) {
    std::vector<double> b;
    for (double t : x.times()) {
      if (t > 0.0 && t < x.horizon()) b.push_back(t);
    }
    return b;
  }

  static std::vector<std::size_t> nearest(double s, const std::vector<double>& other, std::size_t count) {
    std::vector<std::size_t> idx(other.size());
    std::iota(idx.begin(), idx.end(), 0);
    if (count == 0 || count >= other.size()) return idx;
    std::stable_sort(idx.begin(), idx.end(),
                     [&](std::size_t x, std::size_t y) { return std::abs(other[x] - s) < std::abs(other[y] - s); });
    idx.resize(count);
    return idx;
  }

  const MetricPath& u_;
  const MetricPath& v_;
  double T_ = 0.0;
  std::vector<Knot> knots_;
};

Cost combine(const Cost& a, const Cost& b) {
  return {std::max(a.rho, b.rho), std::max(a.shift, b.shift), std::max(a.slope, b.slope)};
}

bool dominates(const Cost& a, const Cost& b) { return a.rho <= b.rho && a.shift <= b.shift && a.slope <= b.slope; }

void insert_pareto(std::vector<Cost>& front, const Cost& c) {
  for (const auto& f : front) {
    if (dominates(f, c)) return;
  }
  std::erase_if(front, [&](const Cost& f) { return dominates(c, f); });
  front.push_back(c);
}

}  // namespace

double skorokhod_distance(const MetricPath& u, const MetricPath& v, const SkorokhodOptions& opt) {
  const SkorokhodProblem P(u, v, opt);
  const std::size_t K = P.knot_count();
  const std::size_t end = K - 1;
  double best = P.edge(0, end).total();
  std::vector<std::vector<Cost>> fronts(K);
  fronts[0].push_back({});
  for (std::size_t p = 0; p < end; ++p) {
    if (fronts[p].empty()) continue;
    for (std::size_t q = p + 1; q < K; ++q) {
      if (!P.precedes(p, q)) continue;
      const Cost e = P.edge(p, q);
      for (const auto& f : fronts[p]) {
        const Cost c = combine(f, e);
        if (c.total() >= best) continue;
        if (q == end) {
          best = c.total();
        } else {
          insert_pareto(fronts[q], c);
        }
      }
    }
  }
  return best;
}

double skorokhod_bruteforce(const MetricPath& u, const MetricPath& v, const SkorokhodOptions& opt) {
  const SkorokhodProblem P(u, v, opt);
  const std::size_t K = P.knot_count();
  if (K > 24) throw DomainError("skorokhod_bruteforce: too many knot candidates");
  double best = kInf;
  std::vector<std::size_t> chain{0};
  auto walk = [&](auto&& self) -> void {
    const std::size_t p = chain.back();
    if (P.precedes(p, K - 1)) {
      Cost c;
      chain.push_back(K - 1);
      for (std::size_t k = 0; k + 1 < chain.size(); ++k) c = combine(c, P.edge(chain[k], chain[k + 1]));
      chain.pop_back();
      best = std::min(best, c.total());
    }
    for (std::size_t q = p + 1; q + 1 < K; ++q) {
      if (!P.precedes(p, q)) continue;
      chain.push_back(q);
      self(self);
      chain.pop_back();
    }
  };
  walk(walk);
  return best;
}

double skorokhod_distance(const RealCadlagPath& u, const RealCadlagPath& v, const SkorokhodOptions& opt) {
  return skorokhod_distance(MetricPath::from_real(u), MetricPath::from_real(v), opt);
}

RealCadlagPath weak_projection_path(const CadlagPath& path, const SpectralField& h) {
  if (h.is_dual()) throw DomainError("weak_projection_path: expects a primal test field");
  if (h.basis() != path.basis()) throw DomainError("weak_projection_path: basis mismatch");
  std::vector<double> times, values;
  for (std::size_t r = 0; r < path.record_count(); ++r) {
    const auto a = path.state(r);
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * h[i];
    if (!times.empty() && times.back() == path.time(r)) {
      values.back() = s;
      continue;
    }
    times.push_back(path.time(r));
    values.push_back(s);
  }
  return RealCadlagPath(std::move(times), std::move(values), path.horizon());
}

double weak_ball_q(std::span<const double> x, std::span<const double> y) {
  const std::size_t n = std::max(x.size(), y.size());
  double s = 0.0;
  double w = 0.5;
  for (std::size_t k = 0; k < n; ++k, w *= 0.5) {
    const double d = std::abs((k < x.size() ? x[k] : 0.0) - (k < y.size() ? y[k] : 0.0));
    s += w * d / (1.0 + d);
  }
  return s;
}

double weak_ball_metric(const CadlagPath& u, const CadlagPath& v, double r, const SkorokhodOptions& opt) {
  if (u.sup_norm_H() > r || v.sup_norm_H() > r) {
    throw DomainError("weak_ball_metric: path leaves the closed ball of radius r");
  }
  const std::size_t width = std::max(u.level(), v.level());
  auto build = [&](const CadlagPath& p) {
    auto times = sample_times(p, 0.0);
    auto states = sample_states(p, times, width);
    return MetricPath(std::move(times), std::move(states), p.horizon(), weak_ball_q);
  };
  return skorokhod_distance(build(u), build(v), opt);
}

// ---------------------------------------------------------------- Aldous

double StoppingRule::tau(const MetricPath& x) const {
  if (kind == Kind::deterministic) return std::clamp(time, 0.0, x.horizon());
  for (std::size_t k = 0; k < x.size(); ++k) {
    if (x.level(k) >= level) return x.times()[k];
  }
  return x.horizon();
}

Interval wilson_interval(std::size_t hits, std::size_t n, double z) {
  if (n == 0) return {0.0, 1.0};
  const double nn = static_cast<double>(n);
  const double p = static_cast<double>(hits) / nn;
  const double z2 = z * z;
  const double centre = (p + z2 / (2.0 * nn)) / (1.0 + z2 / nn);
  const double half = z * std::sqrt(p * (1.0 - p) / nn + z2 / (4.0 * nn * nn)) / (1.0 + z2 / nn);
  return {std::max(0.0, centre - half), std::min(1.0, centre + half)};
}

std::vector<AldousRow> aldous_estimate(std::span<const MetricPath> paths, const StoppingRule& rule,
                                       std::vector<double> thetas, std::span<const double> etas, double z) {
  if (paths.empty()) throw DomainError("aldous_estimate: empty ensemble");
  std::sort(thetas.begin(), thetas.end());
  for (double th : thetas) {
    if (!(th >= 0.0)) throw DomainError("aldous_estimate: theta must be nonnegative");
  }
  const std::size_t nt = thetas.size(), ne = etas.size();
  std::vector<std::size_t> hits(nt * ne, 0), excess(nt, 0);
  for (const auto& x : paths) {
    const double tau = rule.tau(x);
    const std::size_t i0 = x.index_at(tau);
    for (std::size_t a = 0; a < nt; ++a) {
      if (tau + thetas[a] > x.horizon()) ++excess[a];
      const double d = x.distance(x.index_at(std::min(tau + thetas[a], x.horizon())), i0);
      for (std::size_t b = 0; b < ne; ++b) hits[a * ne + b] += d >= etas[b] ? 1 : 0;
    }
  }
  std::vector<AldousRow> rows;
  const std::size_t n = paths.size();
  for (std::size_t b = 0; b < ne; ++b) {
    double running = 0.0;
    for (std::size_t a = 0; a < nt; ++a) {
      AldousRow row;
      row.theta = thetas[a];
      row.eta = etas[b];
      row.hits = hits[a * ne + b];
      row.paths = n;
      row.probability = static_cast<double>(row.hits) / static_cast<double>(n);
      const auto ci = wilson_interval(row.hits, n, z);
      row.wilson_lo = ci.lo;
      row.wilson_hi = ci.hi;
      running = std::max(running, row.probability);
      row.sup_probability = running;
      row.excess_mass = static_cast<double>(excess[a]) / static_cast<double>(n);
      rows.push_back(row);
    }
  }
  return rows;
}

// ---------------------------------------------------------------- tightness

double quantile(std::vector<double> values, double p) {
  if (values.empty()) throw DomainError("quantile: empty sample");
  std::sort(values.begin(), values.end());
  const double h = std::clamp(p, 0.0, 1.0) * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

double lq_V_integral(const CadlagPath& path, double q) {
  if (!(q >= 1.0)) throw DomainError("lq_V_integral: q must be >= 1");
  const auto lambda = path.basis()->eigenvalues();
  std::vector<double> w(path.level());
  for (std::size_t i = 0; i < w.size(); ++i) w[i] = 1.0 + lambda[i];
  if (q == 2.0) return path.quadratic_integral(w);
  return path.integrate(
      [&](std::span<const double> a) {
        double s = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) s += w[i] * a[i] * a[i];
        return std::pow(s, 0.5 * q);
      },
      8);
}

TightnessReport tightness_report(std::span<const CadlagPath> paths, const TightnessOptions& opt) {
  if (paths.empty()) throw DomainError("tightness_report: empty ensemble");
  if (opt.deltas.empty()) throw DomainError("tightness_report: no deltas");
  if (!(opt.epsilon > 0.0 && opt.epsilon < 1.0)) throw DomainError("tightness_report: epsilon must lie in (0, 1)");
  const double dmin = *std::min_element(opt.deltas.begin(), opt.deltas.end());
  const double h = opt.refinement * dmin;
  const std::size_t M = paths.size();
  std::vector<double> sup(M), lq(M);
  std::vector<ModulusCurve> curves(M);
  std::vector<double> diam(M);
  kernels::omp::for_each_index(M, [&](std::size_t p) {
    const auto x = MetricPath::from_galerkin_H(paths[p], h);
    double s = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) s = std::max(s, x.level(k));
    sup[p] = s;
    lq[p] = lq_V_integral(paths[p], opt.q);
    curves[p] = modulus_curve(x, opt.deltas);
    diam[p] = x.diameter();
  });

  TightnessReport rep;
  rep.sup_H = *std::max_element(sup.begin(), sup.end());
  rep.lq_V = *std::max_element(lq.begin(), lq.end());
  const std::size_t nd = curves.front().size();
  for (std::size_t k = 0; k < nd; ++k) {
    std::vector<double> ratio(M);
    for (std::size_t p = 0; p < M; ++p) ratio[p] = diam[p] > 0.0 ? curves[p][k].w / diam[p] : 0.0;
    rep.quantile.push_back({curves.front()[k].delta, quantile(std::move(ratio), 1.0 - opt.epsilon)});
  }
  for (std::size_t k = 1; k < nd; ++k) rep.monotone = rep.monotone && rep.quantile[k].w <= rep.quantile[k - 1].w;
  if (!opt.thetas.empty() && !opt.etas.empty()) {
    std::vector<MetricPath> dual(M);
    kernels::omp::for_each_index(M, [&](std::size_t p) { dual[p] = MetricPath::from_galerkin_Uprime(paths[p], h); });
    rep.aldous = aldous_estimate(dual, opt.rule, opt.thetas, opt.etas);
  }
  rep.pass_a = std::isfinite(rep.sup_H) && rep.sup_H <= opt.sup_bound;
  rep.pass_b = std::isfinite(rep.lq_V) && rep.lq_V <= opt.lq_bound;
  rep.pass_c = rep.monotone && rep.quantile.back().w < opt.threshold;
  rep.verdict = rep.pass_a && rep.pass_b && rep.pass_c;
  return rep;
}

}  // namespace levyns
