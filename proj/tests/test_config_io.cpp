#include <doctest.h>

#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "levyns/config.hpp"
#include "levyns/error.hpp"
#include "levyns/harness.hpp"
#include "levyns/io.hpp"
#include "levyns/report.hpp"

using namespace levyns;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

json small_config() {
  return json::parse(R"({
    "basis": {"d": 2, "n_max": 3, "m": 3.0, "eta0": 0.5},
    "galerkin": {"levels": [2, 4, 8], "T": 0.5, "dt": 0.0625, "R_stop": null,
                 "u0": {"preset": "decaying", "scale": 1.0},
                 "forcing": {"preset": "mode", "mode": 1, "scale": 0.5}},
    "noise": {"preset": "linear-multiplicative", "sigma_F": 0.4, "sigma_G": 0.3, "wiener_modes": 2,
              "marks": {"kind": "finite", "atoms": [0.8, -0.5], "weights": [1.0, 2.0]}},
    "analysis": {"p": [2, 4], "deltas": [0.25, 0.125, 0.0625], "thetas": [0.05, 0.1], "etas": [0.01],
                 "resamples": 200},
    "run": {"M": 12, "seed": 77}
  })");
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("levyns_test_" + name + "_" + std::to_string(::getpid()));
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& file) {
  std::ifstream in(file, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void expect_rejected(json j) { CHECK_THROWS_AS(ExperimentConfig::from_json(j), IngestionError); }

}  // namespace

TEST_CASE("config: defaults parse and round trip through JSON") {
  const auto c = ExperimentConfig::from_json(small_config());
  CHECK(c.galerkin.levels.size() == 3);
  CHECK(c.galerkin.R_stop == std::numeric_limits<double>::infinity());
  const auto again = ExperimentConfig::from_json(c.to_json());
  CHECK(again.hash() == c.hash());
  CHECK(again.to_json().dump() == c.to_json().dump());
  CHECK(c.hash().size() == 16);
}

TEST_CASE("config: schema and cross-field errors are ingestion errors") {
  auto j = small_config();
  j["basis"]["bogus"] = 1;
  expect_rejected(j);

  j = small_config();
  j["extra"] = json::object();
  expect_rejected(j);

  j = small_config();
  j["basis"]["d"] = 4;
  expect_rejected(j);

  j = small_config();
  j["galerkin"]["dt"] = 1.0;
  expect_rejected(j);

  j = small_config();
  j["galerkin"]["levels"] = json::array({2, 500});
  expect_rejected(j);

  j = small_config();
  j["analysis"]["p"] = json::array({2, 6});
  expect_rejected(j);

  j = small_config();
  j["analysis"]["deltas"] = json::array({0.75});
  expect_rejected(j);

  j = small_config();
  j["noise"]["preset"] = "nonsense";
  expect_rejected(j);

  j = small_config();
  j["noise"]["marks"]["weights"] = json::array({1.0});
  expect_rejected(j);

  j = small_config();
  j["noise"]["declared"] = {{"a", 1.0}};
  expect_rejected(j);

  j = small_config();
  j["noise"]["declared"] = {{"unknown", 1.0}};
  expect_rejected(j);

  j = small_config();
  j["basis"]["n_max"] = "three";
  expect_rejected(j);

  j = small_config();
  j["galerkin"]["forcing"] = {{"preset", "csv"}, {"csv", "does_not_exist.csv"}};
  expect_rejected(j);

  CHECK_THROWS_AS(ExperimentConfig::load("/nonexistent/levyns.json"), IngestionError);
}

TEST_CASE("config: hash ignores workers and output, tracks everything else") {
  const auto base = ExperimentConfig::from_json(small_config()).hash();
  auto j = small_config();
  j["run"]["workers"] = 3;
  j["run"]["output"] = "elsewhere";
  CHECK(ExperimentConfig::from_json(j).hash() == base);
  j["run"]["seed"] = 78;
  CHECK(ExperimentConfig::from_json(j).hash() != base);
  j = small_config();
  j["noise"]["sigma_G"] = 0.31;
  CHECK(ExperimentConfig::from_json(j).hash() != base);
  CHECK(hex64(fnv1a64("")) == "cbf29ce484222325");
  CHECK(hex64(fnv1a64("a")) == "af63dc4c8601ec8c");
}

TEST_CASE("config: forcing CSV is read, 1-based, and part of the hash") {
  const auto dir = scratch("csv");
  {
    std::ofstream f(dir / "f.csv");
    f << "time,mode,value\n0,1,0.5\n0.25,2,-1.0\n";
  }
  auto j = small_config();
  j["galerkin"]["forcing"] = {{"preset", "csv"}, {"csv", "f.csv"}};
  const auto c = ExperimentConfig::from_json(j, dir);
  std::vector<double> v(2);
  c.forcing_table.value_at(0.1, v);
  CHECK(v[0] == 0.5);
  CHECK(v[1] == 0.0);
  c.forcing_table.value_at(0.3, v);
  CHECK(v[1] == -1.0);
  const auto h1 = c.hash();
  {
    std::ofstream f(dir / "f.csv");
    f << "time,mode,value\n0,1,0.5\n0.25,2,-2.0\n";
  }
  CHECK(ExperimentConfig::from_json(j, dir).hash() != h1);
  {
    std::ofstream f(dir / "f.csv");
    f << "time,mode,value\n0,0,0.5\n";
  }
  CHECK_THROWS_AS(ExperimentConfig::from_json(j, dir), IngestionError);
  fs::remove_all(dir);
}

TEST_CASE("io: ensembles round trip bit for bit and reject mismatches") {
  const auto cfg = ExperimentConfig::from_json(small_config());
  const auto basis = cfg.make_basis();
  const auto gc = cfg.galerkin_config(basis, 4);
  const Ensemble e = simulate_ensemble(gc, 5, 123);
  const auto dir = scratch("io");
  const fs::path file = dir / ensemble_file_name(4);
  CHECK(file.filename() == "ensemble_n4.bin");
  write_ensemble(file, e, gc.T, cfg.hash());

  const Ensemble back = read_ensemble(file, basis, cfg.hash());
  REQUIRE(back.paths.size() == e.paths.size());
  CHECK(back.level == 4);
  CHECK(back.base_seed == 123);
  for (std::size_t i = 0; i < e.paths.size(); ++i) {
    const auto& a = e.paths[i];
    const auto& b = back.paths[i];
    REQUIRE(a.record_count() == b.record_count());
    CHECK(a.seed == b.seed);
    for (std::size_t r = 0; r < a.record_count(); ++r) {
      CHECK(a.time(r) == b.time(r));
      CHECK(a.kind(r) == b.kind(r));
      for (std::size_t k = 0; k < 4; ++k) {
        CHECK(a.state(r)[k] == b.state(r)[k]);
        CHECK(a.left(r)[k] == b.left(r)[k]);
        CHECK(a.wiener_ledger(r)[k] == b.wiener_ledger(r)[k]);
      }
    }
    std::vector<double> x(4), y(4);
    a.state_at(0.3, x);
    b.state_at(0.3, y);
    CHECK(x == y);
  }

  CHECK_THROWS_AS(read_ensemble(file, basis, "0000000000000000"), IngestionError);
  const auto other = build_basis(2, 4, 3.0, 0.5);
  CHECK_THROWS_AS(read_ensemble(file, other, cfg.hash()), IngestionError);
  CHECK_THROWS_AS(read_ensemble(dir / "missing.bin", basis, cfg.hash()), IngestionError);

  const std::string bytes = slurp(file);
  {
    std::ofstream t(dir / "trunc.bin", std::ios::binary);
    t.write(bytes.data(), static_cast<std::streamsize>(bytes.size() / 2));
  }
  CHECK_THROWS_AS(read_ensemble(dir / "trunc.bin", basis, cfg.hash()), IngestionError);
  {
    std::ofstream t(dir / "magic.bin", std::ios::binary);
    std::string bad = bytes;
    bad[0] = 'X';
    t.write(bad.data(), static_cast<std::streamsize>(bad.size()));
  }
  CHECK_THROWS_AS(read_ensemble(dir / "magic.bin", basis, cfg.hash()), IngestionError);
  {
    std::ofstream t(dir / "tail.bin", std::ios::binary);
    t.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    t.put('\0');
  }
  CHECK_THROWS_AS(read_ensemble(dir / "tail.bin", basis, cfg.hash()), IngestionError);

  std::ostringstream csv;
  write_path_csv(csv, e.paths[0]);
  std::istringstream lines(csv.str());
  std::string header;
  std::getline(lines, header);
  CHECK(header == "t,kind,a1,a2,a3,a4");
  fs::remove_all(dir);
}

TEST_CASE("harness: simulate, analyze and report end to end") {
  const auto cfg = ExperimentConfig::from_json(small_config());
  const auto dir = scratch("harness");
  std::ostringstream log;

  CHECK_THROWS_AS(cmd_analyze(cfg, dir / "a", {}, log), IngestionError);
  CHECK_THROWS_AS(cmd_report(dir / "a", log), IngestionError);

  const auto audits = cmd_validate(cfg, log);
  CHECK(audits_passed(audits));

  const auto sim = cmd_simulate(cfg, dir / "a", {}, log);
  CHECK(sim.files.size() == 3);
  CHECK(sim.failures == 0);
  const RunReport rep = cmd_analyze(cfg, dir / "a", {}, log);
  REQUIRE(rep.levels.size() == 3);
  REQUIRE(rep.scan.has_value());
  CHECK(rep.config_hash == cfg.hash());
  for (const auto& l : rep.levels) {
    CHECK(l.paths == 12);
    CHECK(l.tightness.quantile.size() == 3);
    CHECK(l.moments.sup_moments.size() == 2);
  }

  SUBCASE("report JSON is lossless") {
    const RunReport back = RunReport::load(dir / "a" / "report.json");
    CHECK(back.to_json().dump() == rep.to_json().dump());
  }

  SUBCASE("same seed gives a byte-identical report, a new seed does not") {
    cmd_simulate(cfg, dir / "b", {}, log);
    cmd_analyze(cfg, dir / "b", {}, log);
    CHECK(slurp(dir / "a" / "report.json") == slurp(dir / "b" / "report.json"));
    CHECK(slurp(dir / "a" / ensemble_file_name(8)) == slurp(dir / "b" / ensemble_file_name(8)));
    RunOptions opt;
    opt.seed = 5;
    opt.level = 4;
    const auto one = cmd_simulate(cfg, dir / "c", opt, log);
    CHECK(one.files.size() == 1);
    CHECK(slurp(dir / "a" / ensemble_file_name(4)) != slurp(dir / "c" / ensemble_file_name(4)));
  }

  SUBCASE("report writes the summary and a CSV bundle consistent with the JSON") {
    cmd_report(dir / "a", log);
    CHECK(fs::exists(dir / "a" / "summary.txt"));
    for (const char* f : {"moments.csv", "ratios.csv", "modulus.csv", "aldous.csv"}) {
      CHECK(fs::exists(dir / "a" / "csv" / f));
    }
    std::ifstream mod(dir / "a" / "csv" / "modulus.csv");
    std::string line;
    std::getline(mod, line);
    std::size_t rows = 0;
    while (std::getline(mod, line)) {
      if (!line.empty()) ++rows;
    }
    CHECK(rows == 3 * 3);
  }

  SUBCASE("a changed config is refused against existing ensembles") {
    auto j = small_config();
    j["run"]["seed"] = 78;
    const auto changed = ExperimentConfig::from_json(j);
    CHECK_THROWS_AS(cmd_analyze(changed, dir / "a", {}, log), IngestionError);
  }

  SUBCASE("a corrupted ensemble is an ingestion error") {
    const fs::path f = dir / "a" / ensemble_file_name(2);
    const std::string bytes = slurp(f);
    std::ofstream t(f, std::ios::binary | std::ios::trunc);
    t.write(bytes.data(), static_cast<std::streamsize>(bytes.size() - 9));
    t.close();
    CHECK_THROWS_AS(cmd_analyze(cfg, dir / "a", {}, log), IngestionError);
  }

  SUBCASE("an empty report is refused") {
    std::ofstream(dir / "a" / "report.json", std::ios::trunc) << RunReport{}.to_json().dump();
    CHECK_THROWS_AS(cmd_report(dir / "a", log), IngestionError);
  }
  fs::remove_all(dir);
}

TEST_CASE("harness: output directory resolution") {
  const auto cfg = ExperimentConfig::from_json(small_config());
  CHECK(resolve_output(cfg, "x/y") == fs::path("x/y"));
  ::setenv("LEVYNS_OUTPUT_ROOT", "/tmp/root", 1);
  CHECK(resolve_output(cfg, "") == fs::path("/tmp/root") / cfg.hash());
  ::unsetenv("LEVYNS_OUTPUT_ROOT");
  CHECK(resolve_output(cfg, "") == fs::path(cfg.run.output));
}
