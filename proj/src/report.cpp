#include "levyns/report.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <ostream>

#include "levyns/error.hpp"

namespace levyns {

using nlohmann::json;

namespace {

// Non-finite doubles are stored as strings so the round trip is lossless.
json num(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return "nan";
  return v > 0 ? "inf" : "-inf";
}

double num(const json& j) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  }
  throw IngestionError("report: expected a number, got " + j.dump());
}

json est(const Estimate& e) { return {{"mean", num(e.mean)}, {"lo", num(e.lo)}, {"hi", num(e.hi)}}; }
Estimate est(const json& j) { return {num(j.at("mean")), num(j.at("lo")), num(j.at("hi"))}; }

json audit_json(const NoiseAudit& a) {
  json checks = json::array();
  for (const auto& c : a.checks) {
    checks.push_back({{"name", c.name},
                      {"worst_lhs", num(c.worst_lhs)},
                      {"worst_rhs", num(c.worst_rhs)},
                      {"worst_ratio", num(c.worst_ratio)},
                      {"passed", c.passed},
                      {"witness", c.witness}});
  }
  return {{"assumption", a.assumption}, {"passed", a.passed()}, {"checks", checks}};
}

NoiseAudit audit_from(const json& j) {
  NoiseAudit a;
  a.assumption = j.at("assumption").get<std::string>();
  for (const auto& c : j.at("checks")) {
    AuditCheck k;
    k.name = c.at("name").get<std::string>();
    k.worst_lhs = num(c.at("worst_lhs"));
    k.worst_rhs = num(c.at("worst_rhs"));
    k.worst_ratio = num(c.at("worst_ratio"));
    k.passed = c.at("passed").get<bool>();
    k.witness = c.at("witness").get<std::string>();
    a.checks.push_back(std::move(k));
  }
  return a;
}

json tightness_json(const TightnessReport& t) {
  json curve = json::array(), aldous = json::array();
  for (const auto& p : t.quantile) curve.push_back({{"delta", num(p.delta)}, {"w", num(p.w)}});
  for (const auto& r : t.aldous) {
    aldous.push_back({{"theta", num(r.theta)},
                      {"eta", num(r.eta)},
                      {"hits", r.hits},
                      {"paths", r.paths},
                      {"probability", num(r.probability)},
                      {"wilson_lo", num(r.wilson_lo)},
                      {"wilson_hi", num(r.wilson_hi)},
                      {"sup_probability", num(r.sup_probability)},
                      {"excess_mass", num(r.excess_mass)}});
  }
  return {{"sup_H", num(t.sup_H)},   {"lq_V", num(t.lq_V)},     {"quantile_curve", curve},
          {"aldous", aldous},       {"monotone", t.monotone}, {"pass_a", t.pass_a},
          {"pass_b", t.pass_b},     {"pass_c", t.pass_c},     {"verdict", t.verdict}};
}

TightnessReport tightness_from(const json& j) {
  TightnessReport t;
  t.sup_H = num(j.at("sup_H"));
  t.lq_V = num(j.at("lq_V"));
  for (const auto& p : j.at("quantile_curve")) t.quantile.push_back({num(p.at("delta")), num(p.at("w"))});
  for (const auto& r : j.at("aldous")) {
    AldousRow a;
    a.theta = num(r.at("theta"));
    a.eta = num(r.at("eta"));
    a.hits = r.at("hits").get<std::size_t>();
    a.paths = r.at("paths").get<std::size_t>();
    a.probability = num(r.at("probability"));
    a.wilson_lo = num(r.at("wilson_lo"));
    a.wilson_hi = num(r.at("wilson_hi"));
    a.sup_probability = num(r.at("sup_probability"));
    a.excess_mass = num(r.at("excess_mass"));
    t.aldous.push_back(a);
  }
  t.monotone = j.at("monotone").get<bool>();
  t.pass_a = j.at("pass_a").get<bool>();
  t.pass_b = j.at("pass_b").get<bool>();
  t.pass_c = j.at("pass_c").get<bool>();
  t.verdict = j.at("verdict").get<bool>();
  return t;
}

json moments_json(const LevelMoments& m) {
  json sup = json::array();
  for (const auto& p : m.sup_moments) sup.push_back({{"p", num(p.p)}, {"value", est(p.value)}});
  return {{"level", m.level},
          {"paths", m.paths},
          {"base_seed", m.base_seed},
          {"sup_moments", sup},
          {"grad_integral", est(m.grad_integral)}};
}

LevelMoments moments_from(const json& j) {
  LevelMoments m;
  m.level = j.at("level").get<std::size_t>();
  m.paths = j.at("paths").get<std::size_t>();
  m.base_seed = j.at("base_seed").get<std::uint64_t>();
  for (const auto& p : j.at("sup_moments")) m.sup_moments.push_back({num(p.at("p")), est(p.at("value"))});
  m.grad_integral = est(j.at("grad_integral"));
  return m;
}

json scan_json(const ScanReport& s) {
  json stats = json::array();
  for (const auto& st : s.statistics) {
    json per = json::array(), ratios = json::array();
    for (const auto& e : st.per_level) per.push_back(est(e));
    for (const auto& r : st.ratios) ratios.push_back({{"from", r.from}, {"to", r.to}, {"ratio", est(r.ratio)}});
    stats.push_back({{"name", st.name},
                     {"p", num(st.p)},
                     {"per_level", per},
                     {"ratios", ratios},
                     {"slope", est(st.slope)},
                     {"significant_growth", st.significant_growth},
                     {"pass", st.pass}});
  }
  return {{"levels", s.levels}, {"paired_paths", s.paired_paths}, {"statistics", stats}, {"verdict", s.verdict}};
}

ScanReport scan_from(const json& j) {
  ScanReport s;
  s.levels = j.at("levels").get<std::vector<std::size_t>>();
  s.paired_paths = j.at("paired_paths").get<std::size_t>();
  for (const auto& st : j.at("statistics")) {
    ScanStatistic x;
    x.name = st.at("name").get<std::string>();
    x.p = num(st.at("p"));
    for (const auto& e : st.at("per_level")) x.per_level.push_back(est(e));
    for (const auto& r : st.at("ratios")) {
      x.ratios.push_back({r.at("from").get<std::size_t>(), r.at("to").get<std::size_t>(), est(r.at("ratio"))});
    }
    x.slope = est(st.at("slope"));
    x.significant_growth = st.at("significant_growth").get<bool>();
    x.pass = st.at("pass").get<bool>();
    s.statistics.push_back(std::move(x));
  }
  s.verdict = j.at("verdict").get<bool>();
  return s;
}

}  // namespace

json RunReport::to_json() const {
  json j;
  j["format"] = "levyns-report";
  j["version"] = 1;
  j["config_hash"] = config_hash;
  j["audits"] = json::array();
  for (const auto& a : audits) j["audits"].push_back(audit_json(a));
  j["levels"] = json::array();
  for (const auto& l : levels) {
    j["levels"].push_back({{"level", l.level},
                           {"paths", l.paths},
                           {"failures", l.failures},
                           {"stopped", l.stopped},
                           {"mean_stop_time", num(l.mean_stop_time)},
                           {"ensemble_file", l.ensemble_file},
                           {"moments", moments_json(l.moments)},
                           {"tightness", tightness_json(l.tightness)}});
  }
  j["scan"] = scan ? scan_json(*scan) : json(nullptr);
  return j;
}

RunReport RunReport::from_json(const json& j) {
  try {
    if (j.value("format", "") != "levyns-report") throw IngestionError("report: not a levyns report");
    RunReport r;
    r.config_hash = j.at("config_hash").get<std::string>();
    for (const auto& a : j.at("audits")) r.audits.push_back(audit_from(a));
    for (const auto& l : j.at("levels")) {
      LevelReport x;
      x.level = l.at("level").get<std::size_t>();
      x.paths = l.at("paths").get<std::size_t>();
      x.failures = l.at("failures").get<std::size_t>();
      x.stopped = l.at("stopped").get<std::size_t>();
      x.mean_stop_time = num(l.at("mean_stop_time"));
      x.ensemble_file = l.at("ensemble_file").get<std::string>();
      x.moments = moments_from(l.at("moments"));
      x.tightness = tightness_from(l.at("tightness"));
      r.levels.push_back(std::move(x));
    }
    if (!j.at("scan").is_null()) r.scan = scan_from(j.at("scan"));
    return r;
  } catch (const json::exception& e) {
    throw IngestionError(std::string("report: malformed: ") + e.what());
  }
}

RunReport RunReport::load(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw IngestionError("missing report " + file.string());
  try {
    return from_json(json::parse(in));
  } catch (const json::parse_error& e) {
    throw IngestionError(std::string("report: malformed JSON: ") + e.what());
  }
}

void RunReport::save(const std::filesystem::path& file) const {
  std::ofstream out(file, std::ios::trunc);
  if (!out) throw IngestionError("cannot write " + file.string());
  out << to_json().dump(2) << '\n';
}

void write_summary(std::ostream& os, const RunReport& r) {
  if (r.empty()) throw IngestionError("report: empty report");
  os << "config " << r.config_hash << '\n';
  for (const auto& a : r.audits) {
    os << "audit " << a.assumption << ": " << (a.passed() ? "pass" : "FAIL") << '\n';
    for (const auto& c : a.checks) {
      os << "  " << c.name << " worst ratio " << c.worst_ratio << (c.passed ? "" : "  <-- violated") << '\n';
    }
  }
  for (const auto& l : r.levels) {
    os << "level n=" << l.level << ": " << l.paths << " paths, " << l.failures << " failures, " << l.stopped
       << " stopped\n";
    for (const auto& p : l.moments.sup_moments) {
      os << "  E sup|u|^" << p.p << " = " << p.value.mean << "  [" << p.value.lo << ", " << p.value.hi << "]\n";
    }
    const auto& g = l.moments.grad_integral;
    os << "  E int ||u||^2 = " << g.mean << "  [" << g.lo << ", " << g.hi << "]\n";
    const auto& t = l.tightness;
    os << "  tightness: sup|u|_H " << t.sup_H << ", int ||u||_V^q " << t.lq_V << ", w/diam at delta "
       << (t.quantile.empty() ? 0.0 : t.quantile.back().delta) << " = "
       << (t.quantile.empty() ? 0.0 : t.quantile.back().w) << " -> " << (t.verdict ? "pass" : "FAIL") << '\n';
  }
  if (r.scan) {
    os << "uniformity in n: " << (r.scan->verdict ? "pass" : "FAIL") << '\n';
    for (const auto& s : r.scan->statistics) {
      os << "  " << s.name << (s.name == "sup|u|^p" ? " p=" + std::to_string(s.p) : std::string()) << ":";
      for (const auto& q : s.ratios) os << "  n" << q.from << "->n" << q.to << " " << q.ratio.mean << " (<=" << q.ratio.hi << ")";
      os << "  slope " << s.slope.mean << " [" << s.slope.lo << ", " << s.slope.hi << "]\n";
    }
  }
}

std::vector<std::string> write_csv_bundle(const std::filesystem::path& dir, const RunReport& r) {
  if (r.empty()) throw IngestionError("report: empty report");
  std::filesystem::create_directories(dir);
  auto open = [&](const char* name) {
    std::ofstream f(dir / name, std::ios::trunc);
    if (!f) throw IngestionError("cannot write " + (dir / name).string());
    f << std::setprecision(std::numeric_limits<double>::max_digits10);
    return f;
  };
  {
    auto f = open("moments.csv");
    f << "level,statistic,p,mean,lo,hi\n";
    for (const auto& l : r.levels) {
      for (const auto& p : l.moments.sup_moments) {
        f << l.level << ",sup_H_pow," << p.p << ',' << p.value.mean << ',' << p.value.lo << ',' << p.value.hi << '\n';
      }
      const auto& g = l.moments.grad_integral;
      f << l.level << ",grad_integral,2," << g.mean << ',' << g.lo << ',' << g.hi << '\n';
    }
  }
  {
    auto f = open("ratios.csv");
    f << "statistic,p,from,to,ratio,lo,hi\n";
    if (r.scan) {
      for (const auto& s : r.scan->statistics) {
        for (const auto& q : s.ratios) {
          f << s.name << ',' << s.p << ',' << q.from << ',' << q.to << ',' << q.ratio.mean << ',' << q.ratio.lo << ','
            << q.ratio.hi << '\n';
        }
      }
    }
  }
  {
    auto f = open("modulus.csv");
    f << "level,delta,w_over_diam\n";
    for (const auto& l : r.levels) {
      for (const auto& p : l.tightness.quantile) f << l.level << ',' << p.delta << ',' << p.w << '\n';
    }
  }
  {
    auto f = open("aldous.csv");
    f << "level,theta,eta,probability,wilson_lo,wilson_hi,sup_probability,excess_mass\n";
    for (const auto& l : r.levels) {
      for (const auto& a : l.tightness.aldous) {
        f << l.level << ',' << a.theta << ',' << a.eta << ',' << a.probability << ',' << a.wilson_lo << ','
          << a.wilson_hi << ',' << a.sup_probability << ',' << a.excess_mass << '\n';
      }
    }
  }
  return {"moments.csv", "ratios.csv", "modulus.csv", "aldous.csv"};
}

}  // namespace levyns
