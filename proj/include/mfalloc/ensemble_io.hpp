#pragma once

#include <filesystem>
#include <string>

#include "mfalloc/bifidelity.hpp"

namespace mfalloc {

// On-disk ensemble container: 4-byte magic "MFA1", a compact UTF-8 JSON
// manifest line (model, fidelity, shape, parameter vectors, optional
// seed/config hash), a single '\n', then the snapshot payload as raw
// little-endian float64 in column-major order. Save/load round-trips the
// in-memory ensemble bitwise.

struct EnsembleFileMeta {
  std::uint64_t seed = 0;
  std::string config_hash;  // hex digest of the generating config, or ""
};

void save_ensemble(const std::filesystem::path& path, const Ensemble& ensemble,
                   const EnsembleFileMeta& meta = {});

// Throws std::runtime_error on bad magic, malformed manifest, shape
// mismatch or truncated payload.
Ensemble load_ensemble(const std::filesystem::path& path);
EnsembleFileMeta load_ensemble_meta(const std::filesystem::path& path);

// FNV-1a over a canonical rendering of the generating configuration.
std::string config_hash_hex(const std::string& canonical_config);

}  // namespace mfalloc
