#include "mfalloc/ensemble_io.hpp"

#include <bit>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace mfalloc {

namespace {

constexpr char kMagic[4] = {'M', 'F', 'A', '1'};

void write_le_doubles(std::ostream& os, const double* data, std::size_t count) {
  if constexpr (std::endian::native == std::endian::little) {
    os.write(reinterpret_cast<const char*>(data), static_cast<std::streamsize>(count * 8));
  } else {
    for (std::size_t i = 0; i < count; ++i) {
      std::uint64_t bits;
      std::memcpy(&bits, data + i, 8);
      bits = __builtin_bswap64(bits);
      os.write(reinterpret_cast<const char*>(&bits), 8);
    }
  }
}

void read_le_doubles(std::istream& is, double* data, std::size_t count) {
  if constexpr (std::endian::native == std::endian::little) {
    is.read(reinterpret_cast<char*>(data), static_cast<std::streamsize>(count * 8));
  } else {
    for (std::size_t i = 0; i < count; ++i) {
      std::uint64_t bits;
      is.read(reinterpret_cast<char*>(&bits), 8);
      bits = __builtin_bswap64(bits);
      std::memcpy(data + i, &bits, 8);
    }
  }
}

nlohmann::json read_manifest(std::istream& is, const std::filesystem::path& path) {
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, kMagic, 4) != 0)
    throw std::runtime_error(path.string() + ": not an ensemble file (bad magic)");
  std::string line;
  if (!std::getline(is, line) || line.empty())
    throw std::runtime_error(path.string() + ": missing manifest line");
  nlohmann::json manifest;
  try {
    manifest = nlohmann::json::parse(line);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::runtime_error(path.string() + ": malformed manifest: " + e.what());
  }
  for (const char* key : {"model", "fidelity", "rows", "cols", "parameters"})
    if (!manifest.contains(key))
      throw std::runtime_error(path.string() + ": manifest missing key '" + key + "'");
  return manifest;
}

}  // namespace

std::string config_hash_hex(const std::string& canonical_config) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : canonical_config) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

void save_ensemble(const std::filesystem::path& path, const Ensemble& ensemble,
                   const EnsembleFileMeta& meta) {
  ensemble.validate();
  nlohmann::ordered_json manifest;
  manifest["model"] = ensemble.model_id;
  manifest["fidelity"] = ensemble.fidelity_label;
  manifest["rows"] = ensemble.rows();
  manifest["cols"] = ensemble.cols();
  nlohmann::ordered_json params = nlohmann::ordered_json::array();
  for (const Vector& p : ensemble.parameters) {
    nlohmann::ordered_json point = nlohmann::ordered_json::array();
    for (Index i = 0; i < p.size(); ++i) point.push_back(p(i));
    params.push_back(std::move(point));
  }
  manifest["parameters"] = std::move(params);
  manifest["seed"] = meta.seed;
  manifest["config_hash"] = meta.config_hash;

  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw std::runtime_error(path.string() + ": cannot open for writing");
  os.write(kMagic, 4);
  const std::string line = manifest.dump();
  os.write(line.data(), static_cast<std::streamsize>(line.size()));
  os.put('\n');
  write_le_doubles(os, ensemble.snapshots.data(),
                   static_cast<std::size_t>(ensemble.snapshots.size()));
  if (!os) throw std::runtime_error(path.string() + ": write failed");
}

Ensemble load_ensemble(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error(path.string() + ": cannot open");
  const nlohmann::json manifest = read_manifest(is, path);

  Ensemble ens;
  ens.model_id = manifest.at("model").get<std::string>();
  ens.fidelity_label = manifest.at("fidelity").get<std::string>();
  const auto rows = manifest.at("rows").get<Index>();
  const auto cols = manifest.at("cols").get<Index>();
  if (rows < 1 || cols < 1)
    throw std::runtime_error(path.string() + ": manifest has a non-positive shape");

  const auto& params = manifest.at("parameters");
  if (!params.is_array() || static_cast<Index>(params.size()) != cols)
    throw std::runtime_error(path.string() + ": parameter list does not match column count");
  for (const auto& point : params) {
    Vector p(static_cast<Index>(point.size()));
    for (Index i = 0; i < p.size(); ++i) p(i) = point.at(static_cast<size_t>(i)).get<double>();
    ens.parameters.push_back(std::move(p));
  }

  ens.snapshots.resize(rows, cols);
  read_le_doubles(is, ens.snapshots.data(), static_cast<std::size_t>(rows * cols));
  if (!is) throw std::runtime_error(path.string() + ": truncated payload");
  is.peek();
  if (!is.eof()) throw std::runtime_error(path.string() + ": trailing bytes after payload");

  ens.validate();
  return ens;
}

EnsembleFileMeta load_ensemble_meta(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error(path.string() + ": cannot open");
  const nlohmann::json manifest = read_manifest(is, path);
  EnsembleFileMeta meta;
  if (manifest.contains("seed")) meta.seed = manifest.at("seed").get<std::uint64_t>();
  if (manifest.contains("config_hash"))
    meta.config_hash = manifest.at("config_hash").get<std::string>();
  return meta;
}

}  // namespace mfalloc
