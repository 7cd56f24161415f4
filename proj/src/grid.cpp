#include "levyns/grid.hpp"

#include <fftw3.h>

#include <cmath>
#include <mutex>
#include <numbers>
#include <utility>

#include "levyns/error.hpp"

namespace levyns {

namespace {

// FFTW planning is not thread safe; execution on distinct plans is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

struct FftwFree {
  void operator()(fftw_complex* p) const { fftw_free(p); }
};

bool fft_friendly(int n) {
  for (int f : {2, 3, 5}) {
    while (n % f == 0) n /= f;
  }
  return n == 1;
}

}  // namespace

struct SpectralGrid::Impl {
  std::unique_ptr<fftw_complex[], FftwFree> buffer;
  fftw_plan forward = nullptr;
  fftw_plan backward = nullptr;
  // Flat FFT index of +k and -k for every active mode.
  std::vector<std::size_t> plus;
  std::vector<std::size_t> minus;

  ~Impl() {
    std::lock_guard lock(planner_mutex());
    if (forward) fftw_destroy_plan(forward);
    if (backward) fftw_destroy_plan(backward);
  }
};

SpectralGrid::SpectralGrid(BasisPtr basis, std::size_t active, int per_axis)
    : basis_(std::move(basis)), active_(active), per_axis_(per_axis) {
  if (!basis_) throw DomainError("SpectralGrid: null basis");
  if (active_ < 1 || active_ > basis_->size()) throw DomainError("SpectralGrid: active mode count out of range");
  const int kmax = basis_->max_wavenumber(active_);
  if (per_axis_ < 2 * kmax + 1) {
    throw DomainError("SpectralGrid: grid under-resolved (points per axis < 2 K + 1)");
  }
  const int d = basis_->dim();
  points_ = 1;
  for (int c = 0; c < d; ++c) points_ *= static_cast<std::size_t>(per_axis_);

  impl_ = std::make_unique<Impl>();
  impl_->buffer.reset(fftw_alloc_complex(points_));
  std::array<int, kMaxDim> dims{per_axis_, per_axis_, per_axis_};
  {
    std::lock_guard lock(planner_mutex());
    impl_->forward = fftw_plan_dft(d, dims.data(), impl_->buffer.get(), impl_->buffer.get(), FFTW_FORWARD,
                                   FFTW_ESTIMATE);
    impl_->backward = fftw_plan_dft(d, dims.data(), impl_->buffer.get(), impl_->buffer.get(), FFTW_BACKWARD,
                                    FFTW_ESTIMATE);
  }

  auto flat = [&](const WaveVector& k, int sign) {
    std::size_t idx = 0;
    for (int c = 0; c < d; ++c) {
      const int w = ((sign * k.k[c]) % per_axis_ + per_axis_) % per_axis_;
      idx = idx * static_cast<std::size_t>(per_axis_) + static_cast<std::size_t>(w);
    }
    return idx;
  };
  for (std::size_t i = 0; i < active_; ++i) {
    impl_->plus.push_back(flat(basis_->mode(i).k, 1));
    impl_->minus.push_back(flat(basis_->mode(i).k, -1));
  }
}

SpectralGrid::~SpectralGrid() = default;
SpectralGrid::SpectralGrid(SpectralGrid&&) noexcept = default;
SpectralGrid& SpectralGrid::operator=(SpectralGrid&&) noexcept = default;

int SpectralGrid::dealiased_size(int max_wavenumber) {
  int m = 3 * max_wavenumber + 1;
  while (!fft_friendly(m)) ++m;
  return m;
}

SpectralGrid SpectralGrid::dealiased(BasisPtr basis, std::size_t active) {
  const int m = dealiased_size(basis->max_wavenumber(active));
  return SpectralGrid(std::move(basis), active, m);
}

bool SpectralGrid::resolves_triads() const { return per_axis_ >= 3 * basis_->max_wavenumber(active_) + 1; }

void SpectralGrid::point(std::size_t p, std::span<double> x) const {
  const int d = dim();
  for (int c = d - 1; c >= 0; --c) {
    x[c] = 2.0 * std::numbers::pi * static_cast<double>(p % per_axis_) / per_axis_;
    p /= per_axis_;
  }
}

namespace {

// Scatter the c-th velocity component (optionally differentiated along axis j)
// of the active modes into the Hermitian spectrum.
void scatter(const BasisTable& table, std::span<const std::size_t> plus, std::span<const std::size_t> minus,
             std::span<const double> coeffs, int c, int deriv_axis, fftw_complex* buf, std::size_t points) {
  for (std::size_t p = 0; p < points; ++p) buf[p][0] = buf[p][1] = 0.0;
  const double s = std::sqrt(2.0) / 2.0;
  for (std::size_t i = 0; i < plus.size(); ++i) {
    const double a = coeffs[i];
    if (a == 0.0) continue;
    const Mode& mode = table.mode(i);
    const double amp = s * mode.unit_polarization[c] * a;
    if (amp == 0.0) continue;
    // cos -> (amp, amp) on (+k, -k); sin -> (-i amp, +i amp).
    std::complex<double> hat = mode.parity == Parity::cosine ? std::complex<double>(amp, 0.0)
                                                             : std::complex<double>(0.0, -amp);
    if (deriv_axis >= 0) hat *= std::complex<double>(0.0, static_cast<double>(mode.k.k[deriv_axis]));
    const std::complex<double> conj_hat = std::conj(hat);
    buf[plus[i]][0] += hat.real();
    buf[plus[i]][1] += hat.imag();
    buf[minus[i]][0] += conj_hat.real();
    buf[minus[i]][1] += conj_hat.imag();
  }
}

}  // namespace

void SpectralGrid::synthesize(std::span<const double> coeffs, std::span<double> out) {
  const int d = dim();
  auto* buf = impl_->buffer.get();
  for (int c = 0; c < d; ++c) {
    scatter(*basis_, impl_->plus, impl_->minus, coeffs, c, -1, buf, points_);
    fftw_execute(impl_->backward);
    double* dst = out.data() + static_cast<std::size_t>(c) * points_;
    for (std::size_t p = 0; p < points_; ++p) dst[p] = buf[p][0];
  }
}

void SpectralGrid::synthesize_gradient(std::span<const double> coeffs, std::span<double> out) {
  const int d = dim();
  auto* buf = impl_->buffer.get();
  for (int c = 0; c < d; ++c) {
    for (int j = 0; j < d; ++j) {
      scatter(*basis_, impl_->plus, impl_->minus, coeffs, c, j, buf, points_);
      fftw_execute(impl_->backward);
      double* dst = out.data() + static_cast<std::size_t>(c * d + j) * points_;
      for (std::size_t p = 0; p < points_; ++p) dst[p] = buf[p][0];
    }
  }
}

void SpectralGrid::analyze(std::span<const double> field, std::span<double> dual_out) {
  const int d = dim();
  auto* buf = impl_->buffer.get();
  for (std::size_t i = 0; i < active_; ++i) dual_out[i] = 0.0;
  const double scale = std::sqrt(2.0) / static_cast<double>(points_);
  for (int c = 0; c < d; ++c) {
    const double* src = field.data() + static_cast<std::size_t>(c) * points_;
    for (std::size_t p = 0; p < points_; ++p) {
      buf[p][0] = src[p];
      buf[p][1] = 0.0;
    }
    fftw_execute(impl_->forward);
    for (std::size_t i = 0; i < active_; ++i) {
      const Mode& mode = basis_->mode(i);
      const double pc = mode.unit_polarization[c];
      if (pc == 0.0) continue;
      // Average +k and -k so the pairing is exactly real-symmetric.
      const double re = 0.5 * (buf[impl_->plus[i]][0] + buf[impl_->minus[i]][0]);
      const double im = 0.5 * (buf[impl_->plus[i]][1] - buf[impl_->minus[i]][1]);
      dual_out[i] += scale * pc * (mode.parity == Parity::cosine ? re : -im);
    }
  }
}

GridSamples evaluate_on_grid(const SpectralField& u, int per_axis) {
  if (u.is_dual()) throw DomainError("evaluate_on_grid: expects a primal field");
  SpectralGrid grid(u.basis(), u.size(), per_axis);
  GridSamples s;
  s.dim = grid.dim();
  s.per_axis = per_axis;
  s.points = grid.points();
  s.data.resize(static_cast<std::size_t>(s.dim) * s.points);
  grid.synthesize(u.coeffs(), s.data);
  return s;
}

SpectralField coefficients_from_grid(const BasisPtr& basis, const GridSamples& samples) {
  SpectralGrid grid(basis, basis->size(), samples.per_axis);
  SpectralField out(basis);
  grid.analyze(samples.data, out.coeffs());
  return out;
}

std::vector<double> divergence_on_grid(const SpectralField& u, int per_axis) {
  SpectralGrid grid(u.basis(), u.size(), per_axis);
  const int d = grid.dim();
  std::vector<double> grad(static_cast<std::size_t>(d * d) * grid.points());
  grid.synthesize_gradient(u.coeffs(), grad);
  std::vector<double> div(grid.points(), 0.0);
  for (int c = 0; c < d; ++c) {
    const double* g = grad.data() + static_cast<std::size_t>(c * d + c) * grid.points();
    for (std::size_t p = 0; p < grid.points(); ++p) div[p] += g[p];
  }
  return div;
}

}  // namespace levyns
