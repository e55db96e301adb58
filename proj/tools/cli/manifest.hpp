#pragma once

#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cli/run_config.hpp"

namespace tbcv::cli {

struct Artifact {
  std::string path;  // relative to the output directory
  std::uint64_t bytes = 0;
  std::string fnv1a64;
};

/// Files of one run; written by a single thread.
class ArtifactSet {
 public:
  /// Creates the directory if needed.
  explicit ArtifactSet(std::string dir);
  const std::string& dir() const { return dir_; }
  std::ofstream open(const std::string& name, bool binary = false);
  /// Fails with an Io error if the stream is bad after flushing.
  void close(std::ofstream& os, const std::string& name) const;
  std::vector<Artifact> hashes() const;

 private:
  std::string dir_;
  std::vector<std::string> names_;
};

Artifact hash_file(const std::string& dir, const std::string& name);

std::string compiler_id();

/// manifest.json: version, compiler, command, target, seed, threads, canonical config, config hash, artifacts.
void write_manifest(const RunConfig& rc, const std::vector<Artifact>& artifacts);

struct Manifest {
  Mode mode = Mode::Sweep;
  std::optional<Target> target;
  std::map<std::string, std::string> config;
  std::string config_hash;
  std::uint64_t seed = 0;
  int threads = 1;
  std::string version;
  std::vector<Artifact> artifacts;
};

Manifest read_manifest(const std::string& path);

}  // namespace tbcv::cli
