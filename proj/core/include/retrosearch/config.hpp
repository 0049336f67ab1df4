#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace retro {

/// Declarative run configuration: "[section]" headers, "key = value" lines,
/// full-line comments (# or ;). Values stay raw strings until a typed getter
/// asks for them; getters throw ConfigError naming the offending key. The
/// canonical rendering (sorted sections and keys) is what gets hashed and
/// written beside every run's outputs.
class ConfigFile {
 public:
  bool has(const std::string& section, const std::string& key) const;
  void set(const std::string& section, const std::string& key, const std::string& value);

  std::string get_string(const std::string& section, const std::string& key) const;
  std::string get_string(const std::string& section, const std::string& key,
                         const std::string& fallback) const;
  std::int64_t get_int(const std::string& section, const std::string& key) const;
  std::int64_t get_int(const std::string& section, const std::string& key,
                       std::int64_t fallback) const;
  double get_double(const std::string& section, const std::string& key) const;
  double get_double(const std::string& section, const std::string& key, double fallback) const;
  bool get_bool(const std::string& section, const std::string& key) const;
  bool get_bool(const std::string& section, const std::string& key, bool fallback) const;
  std::uint64_t get_uint64(const std::string& section, const std::string& key) const;
  std::uint64_t get_uint64(const std::string& section, const std::string& key,
                           std::uint64_t fallback) const;
  /// Comma-separated integers.
  std::vector<int> get_int_list(const std::string& section, const std::string& key) const;
  /// Comma-separated numbers.
  std::vector<double> get_double_list(const std::string& section, const std::string& key) const;

  const std::map<std::string, std::map<std::string, std::string>>& sections() const {
    return sections_;
  }

 private:
  std::map<std::string, std::map<std::string, std::string>> sections_;
};

ConfigFile parse_config_text(const std::string& text);
ConfigFile load_config(const std::string& path);

/// Sorted, whitespace-normalized rendering; parse(canonical(c)) == c.
std::string canonical_config_text(const ConfigFile& config);

/// FNV-1a over the canonical text: the run identity recorded in outputs.
std::uint64_t config_hash(const ConfigFile& config);

}  // namespace retro
