#include "levyns/path.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include "levyns/error.hpp"
#include "levyns/quadrature.hpp"

namespace levyns {

const char* to_string(EventKind kind) {
  switch (kind) {
    case EventKind::grid:
      return "grid";
    case EventKind::jump:
      return "jump";
    case EventKind::stop:
      return "stop";
  }
  return "?";
}

double phi1(double lambda, double t) { return lambda > 0.0 ? -std::expm1(-lambda * t) / lambda : t; }

CadlagPath::CadlagPath(BasisPtr basis, std::size_t level, double horizon, bool stokes)
    : basis_(std::move(basis)), level_(level), horizon_(horizon), stokes_(stokes) {
  if (!basis_ || level_ < 1 || level_ > basis_->size()) throw DomainError("CadlagPath: level out of range");
  if (!(horizon_ > 0.0)) throw DomainError("CadlagPath: horizon must be positive");
  decay_.assign(level_, 0.0);
  if (stokes_) {
    for (std::size_t i = 0; i < level_; ++i) decay_[i] = basis_->eigenvalues()[i];
  }
}

std::size_t CadlagPath::add_step(double t0, double h, std::span<const double> b, std::span<const double> f,
                                 std::span<const double> c) {
  step_t0_.push_back(t0);
  step_h_.push_back(h);
  drift_b_.insert(drift_b_.end(), b.begin(), b.begin() + static_cast<long>(level_));
  drift_f_.insert(drift_f_.end(), f.begin(), f.begin() + static_cast<long>(level_));
  drift_c_.insert(drift_c_.end(), c.begin(), c.begin() + static_cast<long>(level_));
  return step_t0_.size() - 1;
}

void CadlagPath::add_record(double t, EventKind kind, std::size_t step, std::span<const double> state,
                            std::span<const double> left, std::span<const double> jump_ledger,
                            std::span<const double> wiener_ledger) {
  if (!times_.empty() && t < times_.back()) throw DomainError("CadlagPath: record times must be nondecreasing");
  auto append = [this](std::vector<double>& dst, std::span<const double> src) {
    dst.insert(dst.end(), src.begin(), src.begin() + static_cast<long>(level_));
  };
  times_.push_back(t);
  kinds_.push_back(kind);
  step_of_.push_back(step);
  append(states_, state);
  append(left_, left);
  append(jump_ledger_, jump_ledger);
  append(wiener_ledger_, wiener_ledger);
}

void CadlagPath::add_constant_record(double t, EventKind kind, std::span<const double> state) {
  const std::vector<double> zero(level_, 0.0);
  add_record(t, kind, kNoStep, state, state, zero, zero);
}

SpectralField CadlagPath::field(std::size_t r) const {
  SpectralField f(basis_);
  const auto s = state(r);
  std::copy(s.begin(), s.end(), f.coeffs().begin());
  return f;
}

std::size_t CadlagPath::record_at(double t) const {
  auto it = std::upper_bound(times_.begin(), times_.end(), t);
  if (it == times_.begin()) return 0;
  return static_cast<std::size_t>(std::distance(times_.begin(), it)) - 1;
}

void CadlagPath::flow(std::size_t r, double tau, std::span<double> out) const {
  const auto a = state(r);
  const std::size_t s = step_of_[r];
  if (s == kNoStep || tau <= 0.0) {
    std::copy(a.begin(), a.end(), out.begin());
    return;
  }
  const auto b = drift_b(s), f = drift_f(s), c = drift_c(s);
  for (std::size_t i = 0; i < level_; ++i) {
    const double lambda = decay_[i];
    const double drift = -b[i] + f[i] - c[i];
    out[i] = std::exp(-lambda * tau) * a[i] + phi1(lambda, tau) * drift;
  }
}

void CadlagPath::state_at(double t, std::span<double> out) const {
  const std::size_t r = record_at(t);
  flow(r, t - times_[r], out);
}

double CadlagPath::quadratic_integral(std::span<const double> weights) const {
  double total = 0.0;
  for (std::size_t r = 0; r < times_.size(); ++r) {
    const double t_end = r + 1 < times_.size() ? times_[r + 1] : horizon_;
    const double len = t_end - times_[r];
    if (len <= 0.0) continue;
    const auto a = state(r);
    const std::size_t s = step_of_[r];
    for (std::size_t i = 0; i < level_; ++i) {
      const double w = weights[i];
      if (w == 0.0) continue;
      if (s == kNoStep) {
        total += w * a[i] * a[i] * len;
        continue;
      }
      const double drift = -drift_b(s)[i] + drift_f(s)[i] - drift_c(s)[i];
      const double lambda = decay_[i];
      double integral = 0.0;
      if (lambda > 0.0) {
        const double c = drift / lambda;
        const double e = a[i] - c;
        integral = c * c * len + 2.0 * c * e * phi1(lambda, len) + e * e * phi1(2.0 * lambda, len);
      } else {
        integral = a[i] * a[i] * len + a[i] * drift * len * len + drift * drift * len * len * len / 3.0;
      }
      total += w * integral;
    }
  }
  return total;
}

double CadlagPath::integrate(const std::function<double(std::span<const double>)>& g, int nodes) const {
  const QuadratureRule unit = gauss_legendre(nodes, 0.0, 1.0);
  std::vector<double> u(level_);
  double total = 0.0;
  for (std::size_t r = 0; r < times_.size(); ++r) {
    const double t_end = r + 1 < times_.size() ? times_[r + 1] : horizon_;
    const double len = t_end - times_[r];
    if (len <= 0.0) continue;
    if (step_of_[r] == kNoStep) {
      total += len * g(state(r));
      continue;
    }
    for (std::size_t q = 0; q < unit.nodes.size(); ++q) {
      flow(r, unit.nodes[q] * len, u);
      total += len * unit.weights[q] * g(u);
    }
  }
  return total;
}

double CadlagPath::sup_norm_H() const {
  double best = 0.0;
  for (std::size_t r = 0; r < times_.size(); ++r) best = std::max(best, std::sqrt(squared_sum(state(r))));
  return best;
}

}  // namespace levyns
