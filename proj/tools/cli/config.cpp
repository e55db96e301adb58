#include "cli/config.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <sstream>

#include "tbcv/error.hpp"

namespace tbcv::cli {
namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

bool valid_key(const std::string& k) {
  if (k.empty()) return false;
  for (char c : k) {
    if (!(std::islower(static_cast<unsigned char>(c)) || std::isdigit(static_cast<unsigned char>(c)) || c == '_')) {
      return false;
    }
  }
  return true;
}

double parse_real(const std::string& key, const std::string& token) {
  double v = 0.0;
  const char* first = token.data();
  const char* last = first + token.size();
  if (!token.empty() && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last || !std::isfinite(v)) {
    fail(ErrorKind::Config, "key '" + key + "': '" + token + "' is not a finite number");
  }
  return v;
}

}  // namespace

KeyValueConfig KeyValueConfig::parse(std::istream& is, const std::string& source) {
  KeyValueConfig cfg;
  std::string line;
  int number = 0;
  while (std::getline(is, line)) {
    ++number;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto where = source + ":" + std::to_string(number);
    const auto eq = line.find('=');
    if (eq == std::string::npos) fail(ErrorKind::Config, where + ": expected 'key = value'");
    const auto key = trim(line.substr(0, eq));
    const auto value = trim(line.substr(eq + 1));
    if (!valid_key(key)) fail(ErrorKind::Config, where + ": invalid key '" + key + "'");
    if (value.empty()) fail(ErrorKind::Config, where + ": empty value for '" + key + "'");
    if (!cfg.entries_.emplace(key, value).second) {
      fail(ErrorKind::Config, where + ": duplicate key '" + key + "'");
    }
  }
  return cfg;
}

KeyValueConfig KeyValueConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::Io, "cannot open config '" + path + "'");
  return parse(in, path);
}

KeyValueConfig KeyValueConfig::from_entries(std::map<std::string, std::string> entries) {
  KeyValueConfig cfg;
  for (auto& [k, v] : entries) {
    if (!valid_key(k)) fail(ErrorKind::Config, "invalid key '" + k + "'");
    cfg.entries_.emplace(k, trim(v));
  }
  return cfg;
}

void KeyValueConfig::set(const std::string& key, const std::string& value) {
  if (!valid_key(key)) fail(ErrorKind::Config, "invalid key '" + key + "'");
  const auto v = trim(value);
  if (v.empty()) fail(ErrorKind::Config, "empty value for '" + key + "'");
  entries_[key] = v;
}

std::optional<std::string> KeyValueConfig::get_string(const std::string& key) const {
  const auto it = entries_.find(key);
  if (it == entries_.end()) return std::nullopt;
  used_.insert(key);
  return it->second;
}

std::optional<double> KeyValueConfig::get_double(const std::string& key) const {
  const auto s = get_string(key);
  if (!s) return std::nullopt;
  return parse_real(key, *s);
}

std::optional<std::int64_t> KeyValueConfig::get_int(const std::string& key) const {
  const auto s = get_string(key);
  if (!s) return std::nullopt;
  // Accept exact integers written in scientific notation, e.g. 1e6.
  const double v = parse_real(key, *s);
  if (v != std::floor(v) || std::abs(v) > 9.0e15) {
    fail(ErrorKind::Config, "key '" + key + "': '" + *s + "' is not an integer");
  }
  return static_cast<std::int64_t>(v);
}

std::optional<std::vector<double>> KeyValueConfig::get_list(const std::string& key) const {
  const auto s = get_string(key);
  if (!s) return std::nullopt;
  std::string text = *s;
  for (char& c : text) {
    if (c == ',') c = ' ';
  }
  std::istringstream in(text);
  std::vector<double> out;
  std::string token;
  while (in >> token) out.push_back(parse_real(key, token));
  if (out.empty()) fail(ErrorKind::Config, "key '" + key + "': empty list");
  return out;
}

double KeyValueConfig::require_double(const std::string& key) const {
  const auto v = get_double(key);
  if (!v) fail(ErrorKind::Config, "missing required key '" + key + "'");
  return *v;
}

void KeyValueConfig::reject_unused() const {
  std::string unknown;
  for (const auto& [k, v] : entries_) {
    if (used_.count(k)) continue;
    if (!unknown.empty()) unknown += ", ";
    unknown += k;
  }
  if (!unknown.empty()) fail(ErrorKind::Config, "unknown or inapplicable keys: " + unknown);
}

std::string KeyValueConfig::canonical() const {
  std::string out;
  for (const auto& [k, v] : entries_) out += k + "=" + v + "\n";
  return out;
}

std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string exact_decimal(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string csv_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

}  // namespace tbcv::cli
