#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace tbcv::cli {

/// Flat `key = value` configuration with `#` comments. Every getter marks its key as consumed so
/// leftover keys can be reported as unknown.
class KeyValueConfig {
 public:
  static KeyValueConfig parse(std::istream& is, const std::string& source = "<config>");
  static KeyValueConfig load(const std::string& path);
  static KeyValueConfig from_entries(std::map<std::string, std::string> entries);

  bool empty() const { return entries_.empty(); }
  bool has(const std::string& key) const { return entries_.count(key) != 0; }
  /// Adds or replaces a key.
  void set(const std::string& key, const std::string& value);
  const std::map<std::string, std::string>& entries() const { return entries_; }

  std::optional<std::string> get_string(const std::string& key) const;
  std::optional<double> get_double(const std::string& key) const;
  std::optional<std::int64_t> get_int(const std::string& key) const;
  /// Comma- or whitespace-separated reals.
  std::optional<std::vector<double>> get_list(const std::string& key) const;

  double require_double(const std::string& key) const;

  /// Config error naming every key no getter has read.
  void reject_unused() const;

  /// Sorted `key=value` lines; the hashing input of a run.
  std::string canonical() const;

 private:
  std::map<std::string, std::string> entries_;
  mutable std::set<std::string> used_;
};

/// 64-bit FNV-1a.
std::uint64_t fnv1a64(const std::string& bytes);
std::string hex64(std::uint64_t v);

/// Exact decimal form of a double (17 significant digits).
std::string exact_decimal(double v);
/// CSV form of a double (9 significant digits).
std::string csv_number(double v);

}  // namespace tbcv::cli
