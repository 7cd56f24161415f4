#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>

#include "levyns/galerkin.hpp"

namespace levyns {

inline constexpr std::uint32_t kEnsembleFormatVersion = 1;

// Little-endian binary layout of one CadlagPath (records, steps, ledgers).
class PathCodec {
 public:
  static void write(std::ostream& os, const CadlagPath& path);
  static CadlagPath read(std::istream& is, const BasisPtr& basis);
};

// magic "LVNSENS", version, config hash, basis hash, level, horizon, base seed,
// paths, failures.
void write_ensemble(const std::filesystem::path& file, const Ensemble& ensemble, double horizon,
                    const std::string& config_hash);
// Throws IngestionError on a missing or truncated file, a bad magic/version,
// or a config/basis hash different from the expected ones.
Ensemble read_ensemble(const std::filesystem::path& file, const BasisPtr& basis, const std::string& config_hash);

// Header "t,kind,a1..an", one row per record.
void write_path_csv(std::ostream& os, const CadlagPath& path);

std::string ensemble_file_name(std::size_t level);

}  // namespace levyns
