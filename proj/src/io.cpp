#include "levyns/io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <limits>

#include "levyns/config.hpp"
#include "levyns/error.hpp"

namespace levyns {

namespace {

constexpr char kMagic[8] = {'L', 'V', 'N', 'S', 'E', 'N', 'S', '\0'};

template <typename T>
void put(std::ostream& os, T value) {
  static_assert(std::is_trivially_copyable_v<T>);
  using U = std::conditional_t<sizeof(T) == 8, std::uint64_t,
                               std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint8_t>>;
  const U bits = std::bit_cast<U>(value);
  char bytes[sizeof(U)];
  for (std::size_t i = 0; i < sizeof(U); ++i) bytes[i] = static_cast<char>((bits >> (8 * i)) & 0xff);
  os.write(bytes, sizeof(U));
}

template <typename T>
T get(std::istream& is) {
  using U = std::conditional_t<sizeof(T) == 8, std::uint64_t,
                               std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint8_t>>;
  unsigned char bytes[sizeof(U)];
  if (!is.read(reinterpret_cast<char*>(bytes), sizeof(U))) throw IngestionError("ensemble file is truncated");
  U bits = 0;
  for (std::size_t i = 0; i < sizeof(U); ++i) bits |= static_cast<U>(bytes[i]) << (8 * i);
  return std::bit_cast<T>(bits);
}

void put_row(std::ostream& os, std::span<const double> row) {
  for (double v : row) put(os, v);
}

std::vector<double> get_row(std::istream& is, std::size_t n) {
  std::vector<double> row(n);
  for (double& v : row) v = get<double>(is);
  return row;
}

std::uint64_t parse_hash(const std::string& hex) {
  try {
    std::size_t used = 0;
    const auto v = std::stoull(hex, &used, 16);
    if (used != hex.size()) throw IngestionError("bad config hash '" + hex + "'");
    return v;
  } catch (const std::logic_error&) {
    throw IngestionError("bad config hash '" + hex + "'");
  }
}

// Sanity bound on counts read from disk.
std::uint64_t get_count(std::istream& is) {
  const auto n = get<std::uint64_t>(is);
  if (n > (std::uint64_t{1} << 32)) throw IngestionError("ensemble file is corrupt (implausible count)");
  return n;
}

}  // namespace

void PathCodec::write(std::ostream& os, const CadlagPath& p) {
  put<std::uint64_t>(os, p.level_);
  put<double>(os, p.horizon_);
  put<std::uint64_t>(os, p.seed);
  put<std::uint8_t>(os, p.stokes_ ? 1 : 0);
  put<std::uint8_t>(os, p.stopped_at_ ? 1 : 0);
  put<double>(os, p.stopped_at_.value_or(0.0));
  put<std::uint64_t>(os, p.times_.size());
  for (std::size_t r = 0; r < p.times_.size(); ++r) {
    put<double>(os, p.times_[r]);
    put<std::uint32_t>(os, static_cast<std::uint32_t>(p.kinds_[r]));
    put<std::uint64_t>(os, p.step_of_[r]);
    put_row(os, p.state(r));
    put_row(os, p.left(r));
    put_row(os, p.jump_ledger(r));
    put_row(os, p.wiener_ledger(r));
  }
  put<std::uint64_t>(os, p.step_t0_.size());
  for (std::size_t s = 0; s < p.step_t0_.size(); ++s) {
    put<double>(os, p.step_t0_[s]);
    put<double>(os, p.step_h_[s]);
    put_row(os, p.drift_b(s));
    put_row(os, p.drift_f(s));
    put_row(os, p.drift_c(s));
  }
}

CadlagPath PathCodec::read(std::istream& is, const BasisPtr& basis) {
  const auto level = get<std::uint64_t>(is);
  const auto horizon = get<double>(is);
  const auto seed = get<std::uint64_t>(is);
  const bool stokes = get<std::uint8_t>(is) != 0;
  const bool stopped = get<std::uint8_t>(is) != 0;
  const double tau = get<double>(is);
  if (level < 1 || level > basis->size()) throw IngestionError("ensemble file: level outside the basis");
  CadlagPath p(basis, level, horizon, stokes);
  p.seed = seed;
  const auto records = get_count(is);
  for (std::uint64_t r = 0; r < records; ++r) {
    const double t = get<double>(is);
    const auto kind = get<std::uint32_t>(is);
    if (kind > 2) throw IngestionError("ensemble file: unknown record kind");
    const auto step = get<std::uint64_t>(is);
    auto a = get_row(is, level), l = get_row(is, level), j = get_row(is, level), w = get_row(is, level);
    p.times_.push_back(t);
    p.kinds_.push_back(static_cast<EventKind>(kind));
    p.step_of_.push_back(static_cast<std::size_t>(step));
    p.states_.insert(p.states_.end(), a.begin(), a.end());
    p.left_.insert(p.left_.end(), l.begin(), l.end());
    p.jump_ledger_.insert(p.jump_ledger_.end(), j.begin(), j.end());
    p.wiener_ledger_.insert(p.wiener_ledger_.end(), w.begin(), w.end());
  }
  const auto steps = get_count(is);
  for (std::uint64_t s = 0; s < steps; ++s) {
    const double t0 = get<double>(is), h = get<double>(is);
    auto b = get_row(is, level), f = get_row(is, level), c = get_row(is, level);
    p.add_step(t0, h, b, f, c);
  }
  for (std::size_t st : p.step_of_) {
    if (st != CadlagPath::kNoStep && st >= p.step_count()) throw IngestionError("ensemble file: dangling step index");
  }
  if (stopped) p.mark_stopped(tau);
  return p;
}

std::string ensemble_file_name(std::size_t level) { return "ensemble_n" + std::to_string(level) + ".bin"; }

void write_ensemble(const std::filesystem::path& file, const Ensemble& e, double horizon,
                    const std::string& config_hash) {
  std::ofstream os(file, std::ios::binary | std::ios::trunc);
  if (!os) throw IngestionError("cannot write " + file.string());
  if (e.paths.empty() && e.failures.empty()) throw DomainError("write_ensemble: nothing to write");
  os.write(kMagic, sizeof kMagic);
  put<std::uint32_t>(os, kEnsembleFormatVersion);
  put<std::uint64_t>(os, parse_hash(config_hash));
  const BasisPtr basis = e.paths.empty() ? nullptr : e.paths.front().basis();
  put<std::uint64_t>(os, basis ? basis->hash() : 0);
  put<std::uint64_t>(os, e.level);
  put<double>(os, horizon);
  put<std::uint64_t>(os, e.base_seed);
  put<std::uint64_t>(os, e.paths.size());
  for (const auto& p : e.paths) PathCodec::write(os, p);
  put<std::uint64_t>(os, e.failures.size());
  for (const auto& f : e.failures) {
    put<std::uint64_t>(os, f.seed);
    put<double>(os, f.last_good_time);
    put<std::uint32_t>(os, static_cast<std::uint32_t>(f.message.size()));
    os.write(f.message.data(), static_cast<std::streamsize>(f.message.size()));
  }
  if (!os) throw IngestionError("write failed for " + file.string());
}

Ensemble read_ensemble(const std::filesystem::path& file, const BasisPtr& basis, const std::string& config_hash) {
  std::ifstream is(file, std::ios::binary);
  if (!is) throw IngestionError("missing ensemble file " + file.string());
  char magic[8];
  if (!is.read(magic, sizeof magic) || std::memcmp(magic, kMagic, sizeof magic) != 0) {
    throw IngestionError(file.string() + " is not an ensemble file");
  }
  if (get<std::uint32_t>(is) != kEnsembleFormatVersion) throw IngestionError(file.string() + ": unsupported version");
  if (get<std::uint64_t>(is) != parse_hash(config_hash)) {
    throw IngestionError(file.string() + ": config hash does not match the configuration");
  }
  const auto bh = get<std::uint64_t>(is);
  Ensemble e;
  e.level = static_cast<std::size_t>(get<std::uint64_t>(is));
  const double horizon = get<double>(is);
  (void)horizon;
  e.base_seed = get<std::uint64_t>(is);
  const auto n = get_count(is);
  if (n > 0 && bh != basis->hash()) throw IngestionError(file.string() + ": basis hash does not match");
  for (std::uint64_t i = 0; i < n; ++i) {
    e.paths.push_back(PathCodec::read(is, basis));
    if (e.paths.back().level() != e.level) throw IngestionError(file.string() + ": path level mismatch");
  }
  const auto nf = get_count(is);
  for (std::uint64_t i = 0; i < nf; ++i) {
    PathFailure f;
    f.seed = get<std::uint64_t>(is);
    f.last_good_time = get<double>(is);
    const auto len = get<std::uint32_t>(is);
    f.message.resize(len);
    if (!is.read(f.message.data(), len)) throw IngestionError("ensemble file is truncated");
    e.failures.push_back(std::move(f));
  }
  if (is.peek() != std::char_traits<char>::eof()) throw IngestionError(file.string() + ": trailing bytes");
  return e;
}

void write_path_csv(std::ostream& os, const CadlagPath& p) {
  os << "t,kind";
  for (std::size_t i = 1; i <= p.level(); ++i) os << ",a" << i;
  os << '\n' << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (std::size_t r = 0; r < p.record_count(); ++r) {
    os << p.time(r) << ',' << to_string(p.kind(r));
    for (double v : p.state(r)) os << ',' << v;
    os << '\n';
  }
}

}  // namespace levyns
