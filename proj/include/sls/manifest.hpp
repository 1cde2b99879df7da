#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace sls {

// FNV-1a over a byte string; stable across platforms.
std::uint64_t fnv1a64(const std::string& bytes);
std::uint64_t file_digest(const std::string& path);

// Provenance record written once per output directory.
struct RunManifest {
  std::string command;
  std::string config_json;  // serialized config actually used
  std::uint64_t seed = 0;
  std::vector<std::pair<std::string, std::uint64_t>> input_digests;

  void write(const std::string& dir) const;
};

}  // namespace sls
