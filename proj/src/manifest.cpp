#include "sls/manifest.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "sls/errors.hpp"
#include "sls/version.hpp"

namespace sls {

using nlohmann::json;

std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t file_digest(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(path + ": cannot open for digest");
  std::stringstream buf;
  buf << in.rdbuf();
  return fnv1a64(buf.str());
}

void RunManifest::write(const std::string& dir) const {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  json j;
  j["schema_version"] = 1;
  j["command"] = command;
  j["software_version"] = kVersion;
  j["seed"] = seed;
  j["config"] = config_json.empty() ? json(nullptr) : json::parse(config_json);
  j["config_hash"] = fnv1a64(config_json);
  json inputs = json::object();
  for (const auto& [path, digest] : input_digests) inputs[path] = digest;
  j["input_digests"] = inputs;
  const auto now = std::chrono::system_clock::now();
  j["written_at_unix_ms"] =
      std::chrono::duration_cast<std::chrono::milliseconds>(now.time_since_epoch())
          .count();
  std::ofstream out(fs::path(dir) / "manifest.json", std::ios::binary);
  out << j.dump(2) << "\n";
}

}  // namespace sls
