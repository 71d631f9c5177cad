#include <doctest.h>

#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>

#include "mfalloc/ensemble_io.hpp"
#include "test_util.hpp"

using namespace mfalloc;
using mfalloc::testing::random_matrix;

namespace {

std::filesystem::path temp_file(const char* stem) {
  return std::filesystem::temp_directory_path() /
         (std::string("mfalloc_io_test_") + stem + ".mfa");
}

Ensemble sample_ensemble() {
  Ensemble e;
  e.snapshots = random_matrix(5, 4, 601);
  e.snapshots(2, 1) = 0.1 + 0.2;  // a value without a short decimal form
  e.model_id = "pendulum";
  e.fidelity_label = "high";
  for (Index j = 0; j < 4; ++j) {
    Vector p(2);
    p << 0.25 + 0.001 * static_cast<double>(j), 1.0 / 3.0;
    e.parameters.push_back(p);
  }
  return e;
}

struct FileGuard {
  std::filesystem::path path;
  ~FileGuard() { std::filesystem::remove(path); }
};

}  // namespace

TEST_SUITE("ensemble_io") {

TEST_CASE("save and load round-trip the ensemble bitwise") {
  const Ensemble original = sample_ensemble();
  FileGuard file{temp_file("roundtrip")};
  EnsembleFileMeta meta;
  meta.seed = 12345;
  meta.config_hash = config_hash_hex("model=pendulum;grid=2x2");
  save_ensemble(file.path, original, meta);

  const Ensemble loaded = load_ensemble(file.path);
  REQUIRE(loaded.rows() == original.rows());
  REQUIRE(loaded.cols() == original.cols());
  CHECK(std::memcmp(loaded.snapshots.data(), original.snapshots.data(),
                    sizeof(double) * static_cast<size_t>(original.snapshots.size())) == 0);
  CHECK(loaded.model_id == original.model_id);
  CHECK(loaded.fidelity_label == original.fidelity_label);
  REQUIRE(loaded.parameters.size() == original.parameters.size());
  for (size_t j = 0; j < loaded.parameters.size(); ++j)
    CHECK(loaded.parameters[j] == original.parameters[j]);

  const EnsembleFileMeta back = load_ensemble_meta(file.path);
  CHECK(back.seed == 12345);
  CHECK(back.config_hash == meta.config_hash);
}

TEST_CASE("the file starts with the magic and a one-line manifest") {
  FileGuard file{temp_file("layout")};
  save_ensemble(file.path, sample_ensemble());
  std::ifstream is(file.path, std::ios::binary);
  char magic[4];
  is.read(magic, 4);
  CHECK(std::memcmp(magic, "MFA1", 4) == 0);
  std::string manifest;
  std::getline(is, manifest);
  CHECK(manifest.front() == '{');
  CHECK(manifest.find("\"model\":\"pendulum\"") != std::string::npos);
  CHECK(manifest.find("\"rows\":5") != std::string::npos);
  CHECK(manifest.find("\"cols\":4") != std::string::npos);
}

TEST_CASE("bad magic, truncation and trailing bytes are rejected") {
  FileGuard file{temp_file("corrupt")};
  save_ensemble(file.path, sample_ensemble());

  // Corrupt the magic.
  {
    std::fstream f(file.path, std::ios::in | std::ios::out | std::ios::binary);
    f.write("XXXX", 4);
  }
  CHECK_THROWS_AS(load_ensemble(file.path), std::runtime_error);

  // Restore the magic, then truncate part of the payload.
  save_ensemble(file.path, sample_ensemble());
  const auto full_size = std::filesystem::file_size(file.path);
  std::filesystem::resize_file(file.path, full_size - 9);
  CHECK_THROWS_AS(load_ensemble(file.path), std::runtime_error);

  // Rewrite and append junk.
  save_ensemble(file.path, sample_ensemble());
  {
    std::ofstream f(file.path, std::ios::app | std::ios::binary);
    f.put('\0');
  }
  CHECK_THROWS_AS(load_ensemble(file.path), std::runtime_error);

  CHECK_THROWS_AS(load_ensemble(temp_file("missing")), std::runtime_error);
}

TEST_CASE("manifests missing required keys are rejected") {
  FileGuard file{temp_file("manifest")};
  std::ofstream os(file.path, std::ios::binary);
  os.write("MFA1", 4);
  os << R"({"model":"x","fidelity":"low","rows":1,"cols":1})" << '\n';  // no parameters
  const double v = 1.0;
  os.write(reinterpret_cast<const char*>(&v), 8);
  os.close();
  CHECK_THROWS_AS(load_ensemble(file.path), std::runtime_error);
}

TEST_CASE("config hash matches the fnv-1a reference vectors") {
  CHECK(config_hash_hex("") == "cbf29ce484222325");
  CHECK(config_hash_hex("a") == "af63dc4c8601ec8c");
  CHECK(config_hash_hex("model=burgers") != config_hash_hex("model=pendulum"));
}

}  // TEST_SUITE
