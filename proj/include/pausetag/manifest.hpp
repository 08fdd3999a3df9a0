#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace pausetag {

inline constexpr const char* kToolVersion = "0.1.0";

// Reproducibility record emitted alongside every artifact-producing run.
struct RunManifest {
  std::string command;
  std::map<std::string, std::string> config;   // resolved settings
  std::map<std::string, std::string> inputs;   // path -> content digest
  std::uint64_t seed = 0;
  double elapsed_ms = 0.0;

  void add_input(const std::string& path);
  void write(const std::string& path) const;
};

// FNV-1a 64 over file contents, hex encoded.
std::string file_digest(const std::string& path);

}  // namespace pausetag
