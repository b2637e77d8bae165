#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace collapse {

inline constexpr const char* kToolVersion = "0.3.0";

/// Lowercase hex SHA-256 of a file's bytes.
std::string sha256_file(const std::filesystem::path& path);

struct ManifestEntry {
  std::string path;  // relative to the output directory
  std::string sha256;
};

/// Record of one CLI invocation and everything it wrote.
struct RunManifest {
  std::string command;
  std::string config_path;
  std::vector<std::uint64_t> seeds;
  std::string out_dir;
  std::string tool_version = kToolVersion;
  double wall_clock_seconds = 0.0;
  std::vector<ManifestEntry> outputs;

  /// Hash `relative` (under out_dir) and append it.
  void add_output(const std::filesystem::path& relative);
  void write(const std::filesystem::path& file) const;
};

}  // namespace collapse
