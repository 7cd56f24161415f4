#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "levyns/estimates.hpp"
#include "levyns/levy.hpp"
#include "levyns/path_analysis.hpp"

namespace levyns {

struct LevelReport {
  std::size_t level = 0;
  std::size_t paths = 0;
  std::size_t failures = 0;
  std::size_t stopped = 0;
  double mean_stop_time = 0.0;  // over stopped paths
  std::string ensemble_file;
  LevelMoments moments;
  TightnessReport tightness;
};

struct RunReport {
  std::string config_hash;
  std::vector<NoiseAudit> audits;
  std::vector<LevelReport> levels;
  std::optional<ScanReport> scan;

  bool empty() const { return levels.empty() && audits.empty(); }
  nlohmann::json to_json() const;
  static RunReport from_json(const nlohmann::json& j);
  static RunReport load(const std::filesystem::path& file);
  void save(const std::filesystem::path& file) const;
};

// Human-readable summary.
void write_summary(std::ostream& os, const RunReport& report);
// moments.csv, ratios.csv, modulus.csv, aldous.csv in dir; returns the file names.
std::vector<std::string> write_csv_bundle(const std::filesystem::path& dir, const RunReport& report);

}  // namespace levyns
