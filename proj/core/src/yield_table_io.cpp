#include <algorithm>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>

#include "tbcv/decoy.hpp"

namespace tbcv {

namespace {

constexpr const char* kHeader = "intensity,config,observable,value,halfwidth";

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double parse_number(const std::string& s, int line) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    fail(ErrorKind::Io, "yield table line " + std::to_string(line) + ": bad number '" + s + "'");
  }
}

}  // namespace

void write_yield_table(std::ostream& os, const YieldTable& table) {
  os << kHeader << '\n';
  for (const auto& e : table.entries()) {
    os << fmt17(e.intensity) << ',' << config_id(e.config) << ',' << observable_id(e.observable)
       << ',' << fmt17(e.value) << ',' << fmt17(e.halfwidth) << '\n';
  }
  if (table.key_map) {
    double mu = 0.0;
    for (const auto& e : table.entries()) mu = std::max(mu, e.intensity);
    os << fmt17(mu) << ",Z,qz," << fmt17(table.key_map->q_z) << ",0\n";
    os << fmt17(mu) << ",Z,ez," << fmt17(table.key_map->e_z) << ",0\n";
  }
}

YieldTable read_yield_table(std::istream& is) {
  YieldTable t;
  std::string line;
  if (!std::getline(is, line) || line != kHeader) {
    fail(ErrorKind::Io, "yield table: missing header '" + std::string(kHeader) + "'");
  }
  int lineno = 1;
  std::optional<double> qz;
  std::optional<double> ez;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) f.push_back(cell);
    if (f.size() != 5) {
      fail(ErrorKind::Io, "yield table line " + std::to_string(lineno) + ": expected 5 fields");
    }
    if (f[2] == "qz") {
      qz = parse_number(f[3], lineno);
      continue;
    }
    if (f[2] == "ez") {
      ez = parse_number(f[3], lineno);
      continue;
    }
    YieldEntry e;
    e.intensity = parse_number(f[0], lineno);
    e.config = parse_config(f[1]);
    e.observable = parse_observable(f[2]);
    e.value = parse_number(f[3], lineno);
    e.halfwidth = parse_number(f[4], lineno);
    t.add(e);
  }
  if (qz && ez) t.key_map = ZStats{*qz, *ez};
  return t;
}

}  // namespace tbcv
