#include "levyns/basis.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <string>

#include "levyns/error.hpp"
#include "levyns/hash.hpp"

namespace levyns {

long WaveVector::norm2() const {
  long s = 0;
  for (int c = 0; c < dim; ++c) s += static_cast<long>(k[c]) * k[c];
  return s;
}

int WaveVector::max_abs() const {
  int m = 0;
  for (int c = 0; c < dim; ++c) m = std::max(m, std::abs(k[c]));
  return m;
}

double WaveVector::dot(std::span<const double> x) const {
  double s = 0.0;
  for (int c = 0; c < dim; ++c) s += k[c] * x[c];
  return s;
}

HollyWiciakWeights holly_wiciak_weights(std::span<const double> phi_norms, double eta0) {
  if (!(eta0 > 0.0 && eta0 < 1.0)) {
    throw DomainError("holly_wiciak_weights: eta0 must lie in (0,1)");
  }
  HollyWiciakWeights w;
  w.eta.reserve(phi_norms.size());
  w.r.reserve(phi_norms.size());
  for (std::size_t i = 0; i < phi_norms.size(); ++i) {
    const double phi = phi_norms[i];
    if (!(phi > 0.0) || !std::isfinite(phi)) {
      throw DomainError("holly_wiciak_weights: Phi-norms must be positive and finite");
    }
    // 1 - eta_n = (1 - eta_0) / 2^n exactly; avoids cancellation in 1 - eta_n.
    const double one_minus = std::ldexp(1.0 - eta0, -static_cast<int>(i + 1));
    w.eta.push_back(1.0 - one_minus);
    w.r.push_back(one_minus / (2.0 * phi));
  }
  return w;
}

namespace {

std::array<long, kMaxDim> cross(const std::array<long, kMaxDim>& a, const std::array<long, kMaxDim>& b) {
  return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}

std::vector<std::array<long, kMaxDim>> polarizations(const WaveVector& k) {
  if (k.dim == 2) return {{-static_cast<long>(k.k[1]), k.k[0], 0}};
  const std::array<long, kMaxDim> kv{k.k[0], k.k[1], k.k[2]};
  std::array<long, kMaxDim> p1{};
  if (k.k[0] != 0 || k.k[1] != 0) {
    p1 = {-kv[1], kv[0], 0};
  } else {
    p1 = {0, -kv[2], kv[1]};
  }
  return {p1, cross(kv, p1)};
}

bool canonical(const WaveVector& k) {
  for (int c = 0; c < k.dim; ++c) {
    if (k.k[c] != 0) return k.k[c] > 0;
  }
  return false;
}

}  // namespace

BasisPtr build_basis(int d, int n_max, double m, double eta0) {
  if (d != 2 && d != 3) throw DomainError("build_basis: dimension must be 2 or 3");
  if (n_max < 1) throw DomainError("build_basis: n_max must be >= 1");
  if (!(m > d / 2.0 + 1.0)) {
    throw DomainError("build_basis: Sobolev order m must exceed d/2 + 1");
  }
  if (!(eta0 > 0.0 && eta0 < 1.0)) throw DomainError("build_basis: eta0 must lie in (0,1)");

  std::shared_ptr<BasisTable> table(new BasisTable());
  table->dim_ = d;
  table->n_max_ = n_max;
  table->m_ = m;
  table->eta0_ = eta0;

  const long radius2 = static_cast<long>(n_max) * n_max;
  const int k3_range = d == 3 ? n_max : 0;
  for (int a = -n_max; a <= n_max; ++a) {
    for (int b = -n_max; b <= n_max; ++b) {
      for (int c = -k3_range; c <= k3_range; ++c) {
        WaveVector k{d, {a, b, c}};
        if (k.norm2() == 0 || k.norm2() > radius2 || !canonical(k)) continue;
        const auto pols = polarizations(k);
        for (std::size_t p = 0; p < pols.size(); ++p) {
          double len2 = 0.0;
          for (int i = 0; i < kMaxDim; ++i) len2 += static_cast<double>(pols[p][i]) * pols[p][i];
          const double len = std::sqrt(len2);
          for (Parity parity : {Parity::cosine, Parity::sine}) {
            Mode mode;
            mode.k = k;
            mode.polarization = static_cast<int>(p);
            mode.parity = parity;
            mode.polarization_int = pols[p];
            for (int i = 0; i < kMaxDim; ++i) mode.unit_polarization[i] = pols[p][i] / len;
            table->modes_.push_back(mode);
          }
        }
      }
    }
  }

  std::sort(table->modes_.begin(), table->modes_.end(), [](const Mode& x, const Mode& y) {
    if (x.k.norm2() != y.k.norm2()) return x.k.norm2() < y.k.norm2();
    if (x.k.k != y.k.k) return x.k.k > y.k.k;
    if (x.polarization != y.polarization) return x.polarization < y.polarization;
    return x.parity < y.parity;
  });

  for (const Mode& mode : table->modes_) {
    const double lambda = static_cast<double>(mode.k.norm2());
    table->eigenvalues_.push_back(lambda);
    table->vm_norms_.push_back(std::pow(1.0 + lambda, m / 2.0));
  }
  table->hw_ = holly_wiciak_weights(table->vm_norms_, eta0);
  for (double r : table->hw_.r) table->u_weights_.push_back(1.0 / (r * r));
  return table;
}

int BasisTable::max_wavenumber(std::size_t n) const {
  int m = 0;
  for (std::size_t i = 0; i < std::min(n, modes_.size()); ++i) m = std::max(m, modes_[i].k.max_abs());
  return m;
}

void BasisTable::evaluate_mode(std::size_t i, std::span<const double> x, std::span<double> out) const {
  const Mode& mode = modes_[i];
  const double phase = mode.k.dot(x);
  const double phi = std::sqrt(2.0) * (mode.parity == Parity::cosine ? std::cos(phase) : std::sin(phase));
  for (int c = 0; c < dim_; ++c) out[c] = phi * mode.unit_polarization[c];
}

std::uint64_t BasisTable::hash() const {
  Fnv1a h;
  h.update("levyns-basis");
  h.update_u64(static_cast<std::uint64_t>(dim_));
  h.update_u64(static_cast<std::uint64_t>(n_max_));
  h.update_f64(m_);
  h.update_f64(eta0_);
  h.update_u64(modes_.size());
  return h.digest();
}

void BasisTable::write_csv(std::ostream& os) const {
  os << "# levyns-basis v" << kBasisCsvVersion << " d=" << dim_ << " n_max=" << n_max_ << " m=" << m_
     << " eta0=" << eta0_ << " hash=" << hash() << '\n';
  os << "index,k1,k2,k3,polarization,parity,eigenvalue,vm_norm,u_weight\n";
  os << std::setprecision(17);
  for (std::size_t i = 0; i < modes_.size(); ++i) {
    const Mode& md = modes_[i];
    os << i + 1 << ',' << md.k.k[0] << ',' << md.k.k[1] << ',' << md.k.k[2] << ',' << md.polarization << ','
       << (md.parity == Parity::cosine ? "cos" : "sin") << ',' << eigenvalues_[i] << ',' << vm_norms_[i] << ','
       << u_weights_[i] << '\n';
  }
}

}  // namespace levyns
