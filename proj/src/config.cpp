#include "levyns/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include "levyns/error.hpp"

namespace levyns {

using nlohmann::json;

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

namespace {

[[noreturn]] void bad(const std::string& where, const std::string& what) {
  throw IngestionError("config: " + where + ": " + what);
}

void check_keys(const json& obj, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) bad(where, "expected an object");
  std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [k, v] : obj.items()) {
    if (!ok.count(k)) bad(where, "unknown key '" + k + "'");
  }
}

template <typename T>
void read(const json& obj, const std::string& where, const char* key, T& out) {
  if (!obj.contains(key)) return;
  try {
    out = obj.at(key).get<T>();
  } catch (const json::exception& e) {
    bad(where + "." + key, e.what());
  }
}

void read_number(const json& obj, const std::string& where, const char* key, double& out) {
  if (!obj.contains(key)) return;
  if (!obj.at(key).is_number()) bad(where + "." + key, "expected a number");
  out = obj.at(key).get<double>();
}

void read_field(const json& obj, const std::string& where, const char* key, FieldSpec& f) {
  if (!obj.contains(key)) return;
  const json& j = obj.at(key);
  const std::string w = where + "." + key;
  check_keys(j, w, {"preset", "scale", "mode", "count", "seed", "coeffs", "csv"});
  read(j, w, "preset", f.preset);
  read_number(j, w, "scale", f.scale);
  read(j, w, "mode", f.mode);
  read(j, w, "count", f.count);
  read(j, w, "seed", f.seed);
  read(j, w, "coeffs", f.coeffs);
  read(j, w, "csv", f.csv);
  static const std::set<std::string> presets{"zero", "decaying", "mode", "random", "coeffs", "csv"};
  if (!presets.count(f.preset)) bad(w + ".preset", "unknown preset '" + f.preset + "'");
}

json field_json(const FieldSpec& f) {
  return {{"preset", f.preset}, {"scale", f.scale}, {"mode", f.mode}, {"count", f.count},
          {"seed", f.seed},     {"coeffs", f.coeffs}, {"csv", f.csv}};
}

std::vector<double> build_field(const FieldSpec& f, const BasisTable& b, const std::string& where) {
  std::vector<double> a(b.size(), 0.0);
  if (f.preset == "decaying") {
    for (std::size_t i = 0; i < a.size(); ++i) a[i] = f.scale / (1.0 + b.eigenvalues()[i]);
  } else if (f.preset == "mode") {
    if (f.mode < 1 || f.mode > a.size()) bad(where + ".mode", "mode index outside [1, N]");
    a[f.mode - 1] = f.scale;
  } else if (f.preset == "random") {
    std::mt19937_64 rng(f.seed);
    std::normal_distribution<double> g(0.0, f.scale);
    const std::size_t n = f.count == 0 ? a.size() : std::min(f.count, a.size());
    for (std::size_t i = 0; i < n; ++i) a[i] = g(rng);
  } else if (f.preset == "coeffs") {
    if (f.coeffs.size() > a.size()) bad(where + ".coeffs", "more coefficients than basis modes");
    std::copy(f.coeffs.begin(), f.coeffs.end(), a.begin());
  }
  for (double v : a) {
    if (!std::isfinite(v)) bad(where, "non-finite coefficient");
  }
  return a;
}

ForcingTable read_forcing_csv(const std::filesystem::path& file, std::size_t N) {
  std::ifstream in(file);
  if (!in) throw IngestionError("config: cannot open forcing CSV " + file.string());
  ForcingTable table;
  table.times.clear();
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    if (lineno == 1 && line.find_first_of("0123456789") != 0 && line[0] != '-' && line[0] != '.') continue;
    std::stringstream ss(line);
    std::string a, b, c;
    if (!std::getline(ss, a, ',') || !std::getline(ss, b, ',') || !std::getline(ss, c)) {
      throw IngestionError("forcing CSV line " + std::to_string(lineno) + ": expected time,mode,value");
    }
    double t = 0.0, v = 0.0;
    long mode = 0;
    try {
      t = std::stod(a);
      mode = std::stol(b);
      v = std::stod(c);
    } catch (const std::exception&) {
      throw IngestionError("forcing CSV line " + std::to_string(lineno) + ": unparsable number");
    }
    if (mode < 1 || static_cast<std::size_t>(mode) > N) {
      throw IngestionError("forcing CSV line " + std::to_string(lineno) + ": mode outside [1, N]");
    }
    if (!std::isfinite(t) || !std::isfinite(v)) {
      throw IngestionError("forcing CSV line " + std::to_string(lineno) + ": non-finite value");
    }
    if (table.times.empty() || t != table.times.back()) {
      if (!table.times.empty() && t < table.times.back()) {
        throw IngestionError("forcing CSV line " + std::to_string(lineno) + ": times must be nondecreasing");
      }
      table.times.push_back(t);
      table.rows.emplace_back(N, 0.0);
    }
    table.rows.back()[static_cast<std::size_t>(mode - 1)] = v;
  }
  if (table.rows.empty()) throw IngestionError("forcing CSV " + file.string() + " has no rows");
  if (table.times.front() != 0.0) throw IngestionError("forcing CSV must start at time 0");
  return table;
}

const std::set<std::string>& declared_keys() {
  static const std::set<std::string> k{"L", "C2", "C4", "C4g", "C8g", "a", "lambda", "kappa", "C_G", "L_G"};
  return k;
}

}  // namespace

ExperimentConfig ExperimentConfig::from_json(const json& j, const std::filesystem::path& base_dir) {
  ExperimentConfig c;
  check_keys(j, "root", {"basis", "galerkin", "noise", "analysis", "run"});

  if (j.contains("basis")) {
    const json& b = j.at("basis");
    check_keys(b, "basis", {"d", "n_max", "m", "eta0"});
    read(b, "basis", "d", c.basis.d);
    read(b, "basis", "n_max", c.basis.n_max);
    read_number(b, "basis", "m", c.basis.m);
    read_number(b, "basis", "eta0", c.basis.eta0);
  }
  if (c.basis.d != 2 && c.basis.d != 3) bad("basis.d", "must be 2 or 3");
  if (c.basis.n_max < 1) bad("basis.n_max", "must be >= 1");
  if (!(c.basis.m > c.basis.d / 2.0 + 1.0)) bad("basis.m", "must exceed d/2 + 1");
  if (!(c.basis.eta0 > 0.0 && c.basis.eta0 < 1.0)) bad("basis.eta0", "must lie in (0, 1)");

  if (j.contains("galerkin")) {
    const json& g = j.at("galerkin");
    const std::string w = "galerkin";
    check_keys(g, w, {"levels", "T", "dt", "R_stop", "u0", "forcing", "forcing_level_exponent", "terms"});
    read(g, w, "levels", c.galerkin.levels);
    read_number(g, w, "T", c.galerkin.T);
    read_number(g, w, "dt", c.galerkin.dt);
    if (g.contains("R_stop") && !g.at("R_stop").is_null()) read_number(g, w, "R_stop", c.galerkin.R_stop);
    read_field(g, w, "u0", c.galerkin.u0);
    read_field(g, w, "forcing", c.galerkin.forcing);
    read_number(g, w, "forcing_level_exponent", c.galerkin.forcing_level_exponent);
    if (g.contains("terms")) {
      const json& t = g.at("terms");
      check_keys(t, "galerkin.terms", {"stokes", "nonlinear", "forcing", "jumps", "wiener"});
      read(t, "galerkin.terms", "stokes", c.galerkin.stokes);
      read(t, "galerkin.terms", "nonlinear", c.galerkin.nonlinear);
      read(t, "galerkin.terms", "forcing", c.galerkin.use_forcing);
      read(t, "galerkin.terms", "jumps", c.galerkin.jumps);
      read(t, "galerkin.terms", "wiener", c.galerkin.wiener);
    }
  }
  if (c.galerkin.u0.preset == "csv") bad("galerkin.u0.preset", "csv is only available for the forcing");
  if (!(c.galerkin.T > 0.0) || !std::isfinite(c.galerkin.T)) bad("galerkin.T", "must be positive");
  if (!(c.galerkin.dt > 0.0 && c.galerkin.dt <= c.galerkin.T)) bad("galerkin.dt", "must lie in (0, T]");
  if (!(c.galerkin.R_stop > 0.0)) bad("galerkin.R_stop", "must be positive or null");
  if (c.galerkin.levels.empty()) bad("galerkin.levels", "at least one level is required");

  if (j.contains("noise")) {
    const json& n = j.at("noise");
    check_keys(n, "noise", {"preset", "sigma_F", "sigma_G", "wiener_modes", "gamma", "marks", "declared"});
    read(n, "noise", "preset", c.noise.preset);
    read_number(n, "noise", "sigma_F", c.noise.sigma_F);
    read_number(n, "noise", "sigma_G", c.noise.sigma_G);
    read(n, "noise", "wiener_modes", c.noise.wiener_modes);
    read_number(n, "noise", "gamma", c.noise.gamma);
    if (n.contains("marks")) {
      const json& m = n.at("marks");
      const std::string w = "noise.marks";
      check_keys(m, w, {"kind", "dim", "atoms", "weights", "lo", "hi", "mass", "alpha", "scale", "eps", "ymax"});
      auto& mk = c.noise.marks;
      read(m, w, "kind", mk.kind);
      read(m, w, "dim", mk.dim);
      read(m, w, "atoms", mk.atoms);
      read(m, w, "weights", mk.weights);
      read(m, w, "lo", mk.lo);
      read(m, w, "hi", mk.hi);
      read_number(m, w, "mass", mk.mass);
      read_number(m, w, "alpha", mk.alpha);
      read_number(m, w, "scale", mk.scale);
      read_number(m, w, "eps", mk.eps);
      read_number(m, w, "ymax", mk.ymax);
    }
    if (n.contains("declared")) {
      const json& d = n.at("declared");
      if (!d.is_object()) bad("noise.declared", "expected an object");
      for (const auto& [k, v] : d.items()) {
        if (!declared_keys().count(k)) bad("noise.declared", "unknown constant '" + k + "'");
        if (!v.is_number()) bad("noise.declared." + k, "expected a number");
        c.noise.declared[k] = v.get<double>();
      }
    }
  }
  try {
    (void)noise_preset_from_string(c.noise.preset);
  } catch (const Error&) {
    bad("noise.preset", "unknown preset '" + c.noise.preset + "'");
  }
  if (!(c.noise.gamma > 0.0)) bad("noise.gamma", "must be positive");
  if (!(c.noise.sigma_F >= 0.0) || !(c.noise.sigma_G >= 0.0)) bad("noise", "sigma_F and sigma_G must be nonnegative");
  if (c.noise.declared.count("a")) {
    const double a = c.noise.declared.at("a");
    if (!(a > 2.0 - 2.0 / (3.0 + c.noise.gamma) && a <= 2.0)) bad("noise.declared.a", "must lie in (2 - 2/(3+gamma), 2]");
  }
  {
    const auto& mk = c.noise.marks;
    if (mk.kind == "finite") {
      if (mk.atoms.empty() || mk.atoms.size() != mk.weights.size()) bad("noise.marks", "atoms/weights mismatch");
    } else if (mk.kind != "uniform_box" && mk.kind != "power_law") {
      bad("noise.marks.kind", "unknown kind '" + mk.kind + "'");
    }
    if (mk.dim < 1 || mk.dim > 3) bad("noise.marks.dim", "must lie in [1, 3]");
  }

  if (j.contains("analysis")) {
    const json& a = j.at("analysis");
    const std::string w = "analysis";
    check_keys(a, w, {"p", "deltas", "thetas", "etas", "q", "epsilon", "threshold", "refinement", "ratio_bound",
                      "stopping", "stop_time", "stop_level", "resamples"});
    read(a, w, "p", c.analysis.p);
    read(a, w, "deltas", c.analysis.deltas);
    read(a, w, "thetas", c.analysis.thetas);
    read(a, w, "etas", c.analysis.etas);
    read_number(a, w, "q", c.analysis.q);
    read_number(a, w, "epsilon", c.analysis.epsilon);
    read_number(a, w, "threshold", c.analysis.threshold);
    read_number(a, w, "refinement", c.analysis.refinement);
    read_number(a, w, "ratio_bound", c.analysis.ratio_bound);
    read(a, w, "stopping", c.analysis.stopping);
    read_number(a, w, "stop_time", c.analysis.stop_time);
    read_number(a, w, "stop_level", c.analysis.stop_level);
    read(a, w, "resamples", c.analysis.resamples);
  }
  for (double p : c.analysis.p) {
    if (!(p >= 1.0 && p <= 4.0 + c.noise.gamma)) bad("analysis.p", "every p must lie in [1, 4 + gamma]");
  }
  if (c.analysis.deltas.empty()) bad("analysis.deltas", "at least one delta is required");
  for (double d : c.analysis.deltas) {
    if (!(d > 0.0 && d <= c.galerkin.T)) bad("analysis.deltas", "every delta must lie in (0, T]");
  }
  for (double t : c.analysis.thetas) {
    if (!(t >= 0.0)) bad("analysis.thetas", "must be nonnegative");
  }
  for (double e : c.analysis.etas) {
    if (!(e > 0.0)) bad("analysis.etas", "must be positive");
  }
  if (!(c.analysis.q >= 1.0)) bad("analysis.q", "must be >= 1");
  if (!(c.analysis.epsilon > 0.0 && c.analysis.epsilon < 1.0)) bad("analysis.epsilon", "must lie in (0, 1)");
  if (!(c.analysis.refinement > 0.0 && c.analysis.refinement <= 1.0)) bad("analysis.refinement", "must lie in (0, 1]");
  if (!(c.analysis.ratio_bound > 1.0)) bad("analysis.ratio_bound", "must exceed 1");
  if (c.analysis.stopping != "deterministic" && c.analysis.stopping != "hitting") {
    bad("analysis.stopping", "must be 'deterministic' or 'hitting'");
  }
  if (c.analysis.resamples < 10) bad("analysis.resamples", "must be >= 10");

  if (j.contains("run")) {
    const json& r = j.at("run");
    check_keys(r, "run", {"M", "seed", "workers", "output"});
    read(r, "run", "M", c.run.M);
    read(r, "run", "seed", c.run.seed);
    read(r, "run", "workers", c.run.workers);
    read(r, "run", "output", c.run.output);
  }
  if (c.run.M < 1) bad("run.M", "must be >= 1");
  if (c.run.workers < 0) bad("run.workers", "must be >= 0");

  // Cross-field checks that need the basis.
  const BasisPtr basis = c.make_basis();
  for (std::size_t n : c.galerkin.levels) {
    if (n < 1 || n > basis->size()) bad("galerkin.levels", "level " + std::to_string(n) + " outside [1, N]");
  }
  (void)build_field(c.galerkin.u0, *basis, "galerkin.u0");
  if (c.galerkin.forcing.preset == "csv") {
    std::filesystem::path file(c.galerkin.forcing.csv);
    if (file.is_relative()) file = base_dir / file;
    c.forcing_table = read_forcing_csv(file, basis->size());
  } else {
    c.forcing_table = ForcingTable::constant(build_field(c.galerkin.forcing, *basis, "galerkin.forcing"));
  }
  c.has_forcing_table = true;
  if (c.noise.wiener_modes > basis->size()) bad("noise.wiener_modes", "exceeds the number of basis modes");
  return c;
}

ExperimentConfig ExperimentConfig::load(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw IngestionError("config: cannot open " + file.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw IngestionError(std::string("config: malformed JSON: ") + e.what());
  }
  return from_json(j, file.parent_path());
}

json ExperimentConfig::to_json() const {
  json j;
  j["basis"] = {{"d", basis.d}, {"n_max", basis.n_max}, {"m", basis.m}, {"eta0", basis.eta0}};
  j["galerkin"] = {{"levels", galerkin.levels},
                   {"T", galerkin.T},
                   {"dt", galerkin.dt},
                   {"R_stop", std::isfinite(galerkin.R_stop) ? json(galerkin.R_stop) : json(nullptr)},
                   {"u0", field_json(galerkin.u0)},
                   {"forcing", field_json(galerkin.forcing)},
                   {"forcing_level_exponent", galerkin.forcing_level_exponent},
                   {"terms",
                    {{"stokes", galerkin.stokes},
                     {"nonlinear", galerkin.nonlinear},
                     {"forcing", galerkin.use_forcing},
                     {"jumps", galerkin.jumps},
                     {"wiener", galerkin.wiener}}}};
  const auto& mk = noise.marks;
  j["noise"] = {{"preset", noise.preset},
                {"sigma_F", noise.sigma_F},
                {"sigma_G", noise.sigma_G},
                {"wiener_modes", noise.wiener_modes},
                {"gamma", noise.gamma},
                {"marks",
                 {{"kind", mk.kind},
                  {"dim", mk.dim},
                  {"atoms", mk.atoms},
                  {"weights", mk.weights},
                  {"lo", mk.lo},
                  {"hi", mk.hi},
                  {"mass", mk.mass},
                  {"alpha", mk.alpha},
                  {"scale", mk.scale},
                  {"eps", mk.eps},
                  {"ymax", mk.ymax}}},
                {"declared", noise.declared}};
  j["analysis"] = {{"p", analysis.p},
                   {"deltas", analysis.deltas},
                   {"thetas", analysis.thetas},
                   {"etas", analysis.etas},
                   {"q", analysis.q},
                   {"epsilon", analysis.epsilon},
                   {"threshold", analysis.threshold},
                   {"refinement", analysis.refinement},
                   {"ratio_bound", analysis.ratio_bound},
                   {"stopping", analysis.stopping},
                   {"stop_time", analysis.stop_time},
                   {"stop_level", analysis.stop_level},
                   {"resamples", analysis.resamples}};
  j["run"] = {{"M", run.M}, {"seed", run.seed}, {"workers", run.workers}, {"output", run.output}};
  return j;
}

std::string ExperimentConfig::hash() const {
  json j = to_json();
  j["run"].erase("workers");
  j["run"].erase("output");
  if (has_forcing_table) j["forcing_table"] = {{"times", forcing_table.times}, {"rows", forcing_table.rows}};
  return hex64(fnv1a64(j.dump()));
}

BasisPtr ExperimentConfig::make_basis() const { return build_basis(basis.d, basis.n_max, basis.m, basis.eta0); }

std::shared_ptr<const MarkSpace> ExperimentConfig::make_marks() const {
  const auto& mk = noise.marks;
  if (mk.kind == "finite") {
    std::vector<Mark> atoms;
    for (double a : mk.atoms) {
      Mark m;
      m.y[0] = a;
      atoms.push_back(m);
    }
    return std::make_shared<const MarkSpace>(MarkSpace::finite(std::move(atoms), mk.weights));
  }
  if (mk.kind == "uniform_box") {
    return std::make_shared<const MarkSpace>(MarkSpace::uniform_box(mk.dim, mk.lo, mk.hi, mk.mass));
  }
  return std::make_shared<const MarkSpace>(MarkSpace::power_law(mk.alpha, mk.scale, mk.eps, mk.ymax));
}

std::shared_ptr<const NoiseCoefficients> ExperimentConfig::make_noise(const BasisPtr& b) const {
  return std::make_shared<const NoiseCoefficients>(b, noise_preset_from_string(noise.preset), noise.sigma_F,
                                                   noise.sigma_G, noise.wiener_modes, noise.gamma);
}

DeclaredConstants ExperimentConfig::declared_constants(const NoiseCoefficients& coeffs, const MarkSpace& marks) const {
  DeclaredConstants d = coeffs.derived_constants(marks);
  d.gamma = noise.gamma;
  for (const auto& [k, v] : noise.declared) {
    if (k == "L") d.L = v;
    if (k == "C2") d.C2 = v;
    if (k == "C4") d.C4 = v;
    if (k == "C4g") d.C4g = v;
    if (k == "C8g") d.C8g = v;
    if (k == "a") d.a = v;
    if (k == "lambda") d.lambda = v;
    if (k == "kappa") d.kappa = v;
    if (k == "C_G") d.C_G = v;
    if (k == "L_G") d.L_G = v;
  }
  return d;
}

GalerkinConfig ExperimentConfig::galerkin_config(const BasisPtr& b, std::size_t level) const {
  GalerkinConfig cfg;
  cfg.basis = b;
  cfg.level = level;
  cfg.T = galerkin.T;
  cfg.dt = galerkin.dt;
  cfg.u0 = build_field(galerkin.u0, *b, "galerkin.u0");
  cfg.forcing = forcing_table.scaled(std::pow(static_cast<double>(level), galerkin.forcing_level_exponent));
  cfg.R_stop = galerkin.R_stop;
  cfg.seed = run.seed;
  cfg.stokes = galerkin.stokes;
  cfg.nonlinear = galerkin.nonlinear;
  cfg.use_forcing = galerkin.use_forcing;
  cfg.jumps = galerkin.jumps;
  cfg.wiener = galerkin.wiener;
  if (galerkin.jumps || galerkin.wiener) {
    cfg.noise = make_noise(b);
    cfg.marks = make_marks();
  }
  return cfg;
}

TightnessOptions ExperimentConfig::tightness_options() const {
  TightnessOptions o;
  o.q = analysis.q;
  o.deltas = analysis.deltas;
  o.epsilon = analysis.epsilon;
  o.threshold = analysis.threshold;
  o.refinement = analysis.refinement;
  o.thetas = analysis.thetas;
  o.etas = analysis.etas;
  o.rule.kind = analysis.stopping == "hitting" ? StoppingRule::Kind::hitting : StoppingRule::Kind::deterministic;
  o.rule.time = analysis.stop_time;
  o.rule.level = analysis.stop_level;
  return o;
}

}  // namespace levyns
