#pragma once

#include <iosfwd>

#include "cli/manifest.hpp"
#include "cli/output.hpp"
#include "cli/run_config.hpp"

namespace tbcv::cli {

/// Plot-ready CSV for one figure or table target.
void reproduce(const RunConfig& rc, ArtifactSet& out, Report& report, std::ostream& log);

}  // namespace tbcv::cli
