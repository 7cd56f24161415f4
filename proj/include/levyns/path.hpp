#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "levyns/basis.hpp"
#include "levyns/field.hpp"

namespace levyns {

enum class EventKind : std::uint32_t { grid = 0, jump = 1, stop = 2 };

const char* to_string(EventKind kind);

// (1 - e^{-lambda t}) / lambda, with the t limit at lambda = 0.
double phi1(double lambda, double t);

// Right-continuous record of a Galerkin trajectory on H_n = span(e_1..e_n).
//
// Records hold the post-event state u(s), its left limit u(s-), and the
// cumulative noise ledgers (compensated jump integral and Wiener integral).
// A record that belongs to a solver step is followed by the exact flow of
//   u' = -lambda u + D,   D = -b + f - c
// with (b, f, c) the nonlinear term, forcing and jump compensator frozen for
// that step; a record with no step (final record, stop record, fixtures) is
// held constant.
class CadlagPath {
 public:
  static constexpr std::size_t kNoStep = std::numeric_limits<std::size_t>::max();

  CadlagPath() = default;
  CadlagPath(BasisPtr basis, std::size_t level, double horizon, bool stokes);

  std::size_t add_step(double t0, double h, std::span<const double> b, std::span<const double> f,
                       std::span<const double> c);
  void add_record(double t, EventKind kind, std::size_t step, std::span<const double> state,
                  std::span<const double> left, std::span<const double> jump_ledger,
                  std::span<const double> wiener_ledger);
  // Constant-per-record fixture entry (no flow, zero ledgers).
  void add_constant_record(double t, EventKind kind, std::span<const double> state);
  void mark_stopped(double tau) { stopped_at_ = tau; }
  // Start the flow of step s at record r (the solver binds each grid record
  // to the step that begins there).
  void bind_step(std::size_t r, std::size_t s) { step_of_.at(r) = s; }

  const BasisPtr& basis() const { return basis_; }
  std::size_t level() const { return level_; }
  double horizon() const { return horizon_; }
  bool stokes() const { return stokes_; }
  std::optional<double> stopped_at() const { return stopped_at_; }
  // Time up to which the path is defined by the dynamics (tau or T).
  double end_time() const { return stopped_at_.value_or(horizon_); }

  std::size_t record_count() const { return times_.size(); }
  std::size_t step_count() const { return step_t0_.size(); }
  double time(std::size_t r) const { return times_[r]; }
  std::span<const double> times() const { return times_; }
  EventKind kind(std::size_t r) const { return kinds_[r]; }
  std::size_t step_of(std::size_t r) const { return step_of_[r]; }
  std::span<const double> state(std::size_t r) const { return row(states_, r); }
  std::span<const double> left(std::size_t r) const { return row(left_, r); }
  std::span<const double> jump_ledger(std::size_t r) const { return row(jump_ledger_, r); }
  std::span<const double> wiener_ledger(std::size_t r) const { return row(wiener_ledger_, r); }

  double step_t0(std::size_t s) const { return step_t0_[s]; }
  double step_h(std::size_t s) const { return step_h_[s]; }
  std::span<const double> drift_b(std::size_t s) const { return row(drift_b_, s); }
  std::span<const double> drift_f(std::size_t s) const { return row(drift_f_, s); }
  std::span<const double> drift_c(std::size_t s) const { return row(drift_c_, s); }

  // Decay rates of the active modes (|k_i|^2, or 0 with the Stokes term off).
  std::span<const double> decay() const { return decay_; }

  SpectralField field(std::size_t r) const;
  // Value of the continuous-time path at t (flow from the last record <= t).
  void state_at(double t, std::span<double> out) const;
  // Index of the last record with time <= t.
  std::size_t record_at(double t) const;

  // Exact  int_0^T sum_i w_i a_i(s)^2 ds  along the piecewise flow.
  double quadratic_integral(std::span<const double> weights) const;
  // Gauss-Legendre (per inter-record interval) integral of g(u(s)) on [0, T].
  double integrate(const std::function<double(std::span<const double>)>& g, int nodes = 3) const;

  // max over records of |u|_H.
  double sup_norm_H() const;

  std::uint64_t seed = 0;

  // Raw storage, exposed for serialization.
  friend class PathCodec;

 private:
  std::span<const double> row(const std::vector<double>& v, std::size_t r) const {
    return {v.data() + r * level_, level_};
  }
  void flow(std::size_t r, double tau, std::span<double> out) const;

  BasisPtr basis_;
  std::size_t level_ = 0;
  double horizon_ = 0.0;
  bool stokes_ = true;
  std::optional<double> stopped_at_;
  std::vector<double> decay_;

  std::vector<double> times_;
  std::vector<EventKind> kinds_;
  std::vector<std::size_t> step_of_;
  std::vector<double> states_, left_, jump_ledger_, wiener_ledger_;

  std::vector<double> step_t0_, step_h_;
  std::vector<double> drift_b_, drift_f_, drift_c_;
};

}  // namespace levyns
