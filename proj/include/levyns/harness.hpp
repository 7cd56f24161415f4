#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <vector>

#include "levyns/config.hpp"
#include "levyns/report.hpp"

namespace levyns {

struct RunOptions {
  std::optional<std::uint64_t> seed;  // overrides run.seed
  std::optional<std::size_t> level;   // restrict to one level
  int workers = 0;
};

// Basis checks plus (F) and (G) audits on unit modes, the origin and random
// fields. Does not throw on a failed audit; see audits_passed.
std::vector<NoiseAudit> cmd_validate(const ExperimentConfig& cfg, std::ostream& log);
bool audits_passed(const std::vector<NoiseAudit>& audits);

struct SimulateResult {
  std::vector<std::filesystem::path> files;
  std::size_t failures = 0;
};
// Writes config.json, manifest.json and one ensemble file per level.
SimulateResult cmd_simulate(const ExperimentConfig& cfg, const std::filesystem::path& out, const RunOptions& opt,
                            std::ostream& log);

// Reads the ensembles listed in out/manifest.json (hashes must match cfg),
// writes out/report.json and out/timing.json.
RunReport cmd_analyze(const ExperimentConfig& cfg, const std::filesystem::path& out, const RunOptions& opt,
                      std::ostream& log);

// Prints the summary of out/report.json, writes summary.txt and the CSV bundle.
void cmd_report(const std::filesystem::path& out, std::ostream& log);

// --out, else $LEVYNS_OUTPUT_ROOT/<config hash>, else run.output.
std::filesystem::path resolve_output(const ExperimentConfig& cfg, const std::string& flag);

}  // namespace levyns
