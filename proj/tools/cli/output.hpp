#pragma once

#include <limits>
#include <nlohmann/json.hpp>
#include <ostream>
#include <string>
#include <vector>

#include "cli/manifest.hpp"
#include "tbcv/keyrate.hpp"

namespace tbcv::cli {

using Report = nlohmann::ordered_json;

inline void csv_row(std::ostream& os, const std::vector<std::string>& fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) os << ',';
    os << fields[i];
  }
  os << '\n';
}

/// 9 significant digits in CSV; JSON carries exact decimal strings.
inline std::string num(double v) { return csv_number(v); }
inline std::string jnum(double v) { return exact_decimal(v); }

/// PLOB bound with the lossless channel mapped to +infinity.
inline double plob_or_inf(double eta) {
  return eta >= 1.0 ? std::numeric_limits<double>::infinity() : plob_bound(eta);
}

inline void write_report(ArtifactSet& artifacts, const Report& report) {
  auto os = artifacts.open("report.json");
  os << report.dump(2) << '\n';
  artifacts.close(os, "report.json");
}

}  // namespace tbcv::cli
