#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace wdrc {

/// Flat key-value configuration with [section] headers. Keys are addressed
/// as "section.key". Values are typed on read; every read records the
/// effective value (defaults included) so the whole configuration can be
/// echoed into a manifest.
///
///   # comment
///   [investment]
///   zeta = 0.25
///   theta = 0, 0.005, 0.01
class Config {
 public:
  Config() = default;

  static Config parse(const std::string& text, const std::string& origin = "<string>");
  static Config load(const std::filesystem::path& path);

  /// "section.key=value"; replaces any file value.
  void apply_override(const std::string& assignment);
  void set(const std::string& key, const std::string& value);

  bool has(const std::string& key) const { return raw_.count(key) > 0; }

  double get_double(const std::string& key, double fallback);
  int get_int(const std::string& key, int fallback);
  std::uint64_t get_uint(const std::string& key, std::uint64_t fallback);
  bool get_bool(const std::string& key, bool fallback);
  std::string get_string(const std::string& key, const std::string& fallback);
  std::vector<double> get_doubles(const std::string& key, const std::vector<double>& fallback);
  std::vector<int> get_ints(const std::string& key, const std::vector<int>& fallback);

  /// Throws ConfigurationError naming the first key that was supplied but
  /// never read.
  void reject_unknown() const;

  /// Effective values of every key read so far, sorted by key.
  const std::map<std::string, std::string>& effective() const { return effective_; }
  /// "key = value" lines of effective(); hashed for the manifest.
  std::string canonical() const;
  /// FNV-1a 64 of canonical().
  std::uint64_t hash() const;

 private:
  const std::string* lookup(const std::string& key);

  std::map<std::string, std::string> raw_;
  std::set<std::string> used_;
  std::map<std::string, std::string> effective_;
};

std::string hex64(std::uint64_t v);

}  // namespace wdrc
