#pragma once

#include <iosfwd>
#include <vector>

#include "cli/manifest.hpp"
#include "cli/run_config.hpp"

namespace tbcv::cli {

/// Runs the configured mode, writes its artifacts and manifest.json, and prints a short summary
/// to `log`. Returns the artifact list recorded in the manifest.
std::vector<Artifact> run(const RunConfig& rc, std::ostream& log);

}  // namespace tbcv::cli
