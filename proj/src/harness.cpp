#include "levyns/harness.hpp"

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <ostream>
#include <random>
#include <sstream>

#include "levyns/error.hpp"
#include "levyns/grid.hpp"
#include "levyns/io.hpp"
#include "levyns/kernels.hpp"
#include "levyns/random.hpp"

namespace levyns {

using nlohmann::json;

namespace {

std::vector<std::size_t> selected_levels(const ExperimentConfig& cfg, const RunOptions& opt) {
  if (!opt.level) return cfg.galerkin.levels;
  for (std::size_t n : cfg.galerkin.levels) {
    if (n == *opt.level) return {n};
  }
  throw IngestionError("--level " + std::to_string(*opt.level) + " is not one of the configured levels");
}

ExperimentConfig with_seed(ExperimentConfig cfg, const RunOptions& opt) {
  if (opt.seed) cfg.run.seed = *opt.seed;
  return cfg;
}

NoiseAudit basis_audit(const BasisPtr& basis, std::uint64_t seed) {
  const BasisTable& b = *basis;
  NoiseAudit a;
  a.assumption = "basis";
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  SpectralField u(basis);
  for (std::size_t i = 0; i < b.size(); ++i) u[i] = g(rng);
  const int M = SpectralGrid::dealiased_size(b.max_wavenumber(b.size()));
  const auto div = divergence_on_grid(u, M);
  AuditCheck d{"divergence-free", 0.0, 1e-10, 0.0, true, ""};
  for (double v : div) d.worst_lhs = std::max(d.worst_lhs, std::abs(v));
  d.worst_ratio = d.worst_lhs / d.worst_rhs;
  d.passed = d.worst_lhs <= d.worst_rhs * std::max(1.0, norm_V(u));
  a.checks.push_back(d);

  const auto samples = evaluate_on_grid(u, M);
  double l2 = 0.0;
  for (double v : samples.data) l2 += v * v;
  l2 /= static_cast<double>(samples.points);
  const double h2 = norm_H(u) * norm_H(u);
  AuditCheck p{"parseval", std::abs(l2 - h2), 1e-10 * h2, 0.0, true, ""};
  p.worst_ratio = p.worst_lhs / p.worst_rhs;
  p.passed = p.worst_lhs <= p.worst_rhs;
  a.checks.push_back(p);

  AuditCheck e{"embedding |x|_Vm <= (1 - eta0) |x|_U", 0.0, 1.0 - b.eta0(), 0.0, true, ""};
  for (std::size_t i = 0; i < b.size(); ++i) {
    // |e_i|_Vm / |e_i|_U = vm_i * r_i
    e.worst_lhs = std::max(e.worst_lhs, b.vm_norms()[i] * b.u_radii()[i]);
  }
  e.worst_ratio = e.worst_lhs / e.worst_rhs;
  e.passed = e.worst_lhs <= e.worst_rhs;
  a.checks.push_back(e);
  return a;
}

std::vector<std::vector<double>> audit_samples(const BasisTable& b, std::uint64_t seed) {
  std::vector<std::vector<double>> s;
  s.emplace_back(b.size(), 0.0);
  for (std::size_t i = 0; i < b.size(); ++i) {
    s.emplace_back(b.size(), 0.0);
    s.back()[i] = 1.0;
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  for (double scale : {0.01, 0.1, 1.0, 10.0}) {
    for (int k = 0; k < 12; ++k) {
      s.emplace_back(b.size());
      for (double& v : s.back()) v = scale * g(rng);
    }
  }
  return s;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

bool audits_passed(const std::vector<NoiseAudit>& audits) {
  for (const auto& a : audits) {
    if (!a.passed()) return false;
  }
  return true;
}

std::vector<NoiseAudit> cmd_validate(const ExperimentConfig& cfg, std::ostream& log) {
  const BasisPtr b = cfg.make_basis();
  std::vector<NoiseAudit> out;
  out.push_back(basis_audit(b, derive_seed(cfg.run.seed, 11)));
  const auto noise = cfg.make_noise(b);
  const auto marks = cfg.make_marks();
  const auto declared = cfg.declared_constants(*noise, *marks);
  const auto samples = audit_samples(*b, derive_seed(cfg.run.seed, 12));
  if (cfg.galerkin.jumps) out.push_back(validate_F(*noise, *marks, declared, samples));
  if (cfg.galerkin.wiener) out.push_back(validate_G_coercivity(*noise, declared, samples));
  for (const auto& a : out) {
    log << a.assumption << ": " << (a.passed() ? "pass" : "FAIL") << '\n';
    for (const auto& c : a.checks) {
      log << "  " << c.name << ": worst " << c.worst_lhs << " vs " << c.worst_rhs << (c.passed ? "" : "  violated");
      if (!c.passed && !c.witness.empty()) log << " (" << c.witness << ")";
      log << '\n';
    }
  }
  return out;
}

std::filesystem::path resolve_output(const ExperimentConfig& cfg, const std::string& flag) {
  if (!flag.empty()) return flag;
  if (const char* root = std::getenv("LEVYNS_OUTPUT_ROOT"); root && *root) {
    return std::filesystem::path(root) / cfg.hash();
  }
  return cfg.run.output;
}

SimulateResult cmd_simulate(const ExperimentConfig& cfg_in, const std::filesystem::path& out, const RunOptions& opt,
                            std::ostream& log) {
  const ExperimentConfig cfg = with_seed(cfg_in, opt);
  if (opt.workers > 0) kernels::set_workers(opt.workers);
  std::filesystem::create_directories(out);
  const std::string hash = cfg.hash();
  const BasisPtr b = cfg.make_basis();
  SimulateResult res;
  json manifest;
  manifest["config_hash"] = hash;
  manifest["basis_hash"] = hex64(b->hash());
  manifest["levels"] = json::array();
  for (std::size_t n : selected_levels(cfg, opt)) {
    const auto gcfg = cfg.galerkin_config(b, n);
    const Ensemble e = simulate_ensemble(gcfg, cfg.run.M, cfg.run.seed);
    const auto file = out / ensemble_file_name(n);
    write_ensemble(file, e, cfg.galerkin.T, hash);
    res.files.push_back(file);
    res.failures += e.failures.size();
    std::size_t stopped = 0;
    for (const auto& p : e.paths) stopped += p.stopped_at() ? 1 : 0;
    manifest["levels"].push_back({{"level", n},
                                  {"file", ensemble_file_name(n)},
                                  {"paths", e.paths.size()},
                                  {"failures", e.failures.size()},
                                  {"stopped", stopped}});
    log << "n=" << n << ": " << e.paths.size() << " paths, " << e.failures.size() << " failures -> " << file.string()
        << '\n';
    for (const auto& f : e.failures) {
      log << "  seed " << f.seed << " failed at t=" << f.last_good_time << ": " << f.message << '\n';
    }
  }
  {
    std::ofstream c(out / "config.json", std::ios::trunc);
    c << cfg.to_json().dump(2) << '\n';
    std::ofstream m(out / "manifest.json", std::ios::trunc);
    m << manifest.dump(2) << '\n';
    if (!c || !m) throw IngestionError("cannot write the manifest in " + out.string());
  }
  return res;
}

RunReport cmd_analyze(const ExperimentConfig& cfg_in, const std::filesystem::path& out, const RunOptions& opt,
                      std::ostream& log) {
  const ExperimentConfig cfg = with_seed(cfg_in, opt);
  if (opt.workers > 0) kernels::set_workers(opt.workers);
  const auto start = std::chrono::steady_clock::now();
  const std::string hash = cfg.hash();
  std::ifstream mf(out / "manifest.json");
  if (!mf) throw IngestionError("missing " + (out / "manifest.json").string());
  json manifest;
  try {
    manifest = json::parse(mf);
  } catch (const json::parse_error& e) {
    throw IngestionError(std::string("manifest: malformed JSON: ") + e.what());
  }
  if (manifest.value("config_hash", "") != hash) {
    throw IngestionError("manifest config hash " + manifest.value("config_hash", "?") +
                         " does not match the configuration (" + hash + ")");
  }
  const BasisPtr b = cfg.make_basis();
  json timing;
  RunReport rep;
  rep.config_hash = hash;
  auto t0 = std::chrono::steady_clock::now();
  std::ostringstream quiet;
  rep.audits = cmd_validate(cfg, quiet);
  timing["validate"] = seconds_since(t0);

  std::vector<Ensemble> ensembles;
  const auto wanted = selected_levels(cfg, opt);
  for (const auto& entry : manifest.at("levels")) {
    const auto n = entry.at("level").get<std::size_t>();
    if (std::find(wanted.begin(), wanted.end(), n) == wanted.end()) continue;
    t0 = std::chrono::steady_clock::now();
    Ensemble e = read_ensemble(out / entry.at("file").get<std::string>(), b, hash);
    timing["read_n" + std::to_string(n)] = seconds_since(t0);
    if (e.paths.empty()) throw IngestionError("ensemble n=" + std::to_string(n) + " has no successful paths");

    t0 = std::chrono::steady_clock::now();
    LevelReport lr;
    lr.level = n;
    lr.paths = e.paths.size();
    lr.failures = e.failures.size();
    lr.ensemble_file = entry.at("file").get<std::string>();
    double tau = 0.0;
    for (const auto& p : e.paths) {
      if (p.stopped_at()) {
        ++lr.stopped;
        tau += *p.stopped_at();
      }
    }
    lr.mean_stop_time = lr.stopped ? tau / static_cast<double>(lr.stopped) : 0.0;
    BootstrapOptions bo;
    bo.resamples = cfg.analysis.resamples;
    bo.seed = derive_seed(cfg.run.seed, 21);
    lr.moments = moment_estimates(e, cfg.analysis.p, cfg.noise.gamma, bo);
    lr.tightness = tightness_report(e.paths, cfg.tightness_options());
    timing["analyze_n" + std::to_string(n)] = seconds_since(t0);
    log << "n=" << n << ": moments and tightness done\n";
    rep.levels.push_back(std::move(lr));
    ensembles.push_back(std::move(e));
  }
  if (rep.levels.empty()) throw IngestionError("manifest lists no ensembles to analyze");
  if (ensembles.size() >= 3) {
    ScanOptions so;
    so.ratio_bound = cfg.analysis.ratio_bound;
    so.bootstrap.resamples = cfg.analysis.resamples;
    so.bootstrap.seed = derive_seed(cfg.run.seed, 22);
    rep.scan = constant_scan(ensembles, cfg.analysis.p, so);
  }
  rep.save(out / "report.json");
  timing["total"] = seconds_since(start);
  std::ofstream tf(out / "timing.json", std::ios::trunc);
  tf << timing.dump(2) << '\n';
  return rep;
}

void cmd_report(const std::filesystem::path& out, std::ostream& log) {
  const RunReport rep = RunReport::load(out / "report.json");
  std::ofstream summary(out / "summary.txt", std::ios::trunc);
  write_summary(summary, rep);
  write_summary(log, rep);
  const auto files = write_csv_bundle(out / "csv", rep);
  log << "csv bundle:";
  for (const auto& f : files) log << ' ' << (out / "csv" / f).string();
  log << '\n';
}

}  // namespace levyns
