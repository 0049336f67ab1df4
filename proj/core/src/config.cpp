#include "retrosearch/config.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "retrosearch/errors.hpp"

namespace retro {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return {};
  std::size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

[[noreturn]] void missing(const std::string& section, const std::string& key) {
  throw ConfigError("missing config key [" + section + "] " + key);
}

[[noreturn]] void bad_value(const std::string& section, const std::string& key,
                            const std::string& value, const char* type) {
  throw ConfigError("config key [" + section + "] " + key + ": '" + value + "' is not a " + type);
}

}  // namespace

bool ConfigFile::has(const std::string& section, const std::string& key) const {
  auto s = sections_.find(section);
  return s != sections_.end() && s->second.count(key) > 0;
}

void ConfigFile::set(const std::string& section, const std::string& key,
                     const std::string& value) {
  sections_[section][key] = value;
}

std::string ConfigFile::get_string(const std::string& section, const std::string& key) const {
  auto s = sections_.find(section);
  if (s == sections_.end()) missing(section, key);
  auto k = s->second.find(key);
  if (k == s->second.end()) missing(section, key);
  return k->second;
}

std::string ConfigFile::get_string(const std::string& section, const std::string& key,
                                   const std::string& fallback) const {
  return has(section, key) ? get_string(section, key) : fallback;
}

std::int64_t ConfigFile::get_int(const std::string& section, const std::string& key) const {
  const std::string v = get_string(section, key);
  char* end = nullptr;
  const long long parsed = std::strtoll(v.c_str(), &end, 10);
  if (end == v.c_str() || *end != '\0') bad_value(section, key, v, "integer");
  return parsed;
}

std::int64_t ConfigFile::get_int(const std::string& section, const std::string& key,
                                 std::int64_t fallback) const {
  return has(section, key) ? get_int(section, key) : fallback;
}

double ConfigFile::get_double(const std::string& section, const std::string& key) const {
  const std::string v = get_string(section, key);
  char* end = nullptr;
  const double parsed = std::strtod(v.c_str(), &end);
  if (end == v.c_str() || *end != '\0') bad_value(section, key, v, "number");
  return parsed;
}

double ConfigFile::get_double(const std::string& section, const std::string& key,
                              double fallback) const {
  return has(section, key) ? get_double(section, key) : fallback;
}

bool ConfigFile::get_bool(const std::string& section, const std::string& key) const {
  const std::string v = get_string(section, key);
  if (v == "true" || v == "yes" || v == "on" || v == "1") return true;
  if (v == "false" || v == "no" || v == "off" || v == "0") return false;
  bad_value(section, key, v, "boolean");
}

bool ConfigFile::get_bool(const std::string& section, const std::string& key,
                          bool fallback) const {
  return has(section, key) ? get_bool(section, key) : fallback;
}

std::uint64_t ConfigFile::get_uint64(const std::string& section, const std::string& key) const {
  const std::string v = get_string(section, key);
  char* end = nullptr;
  const unsigned long long parsed = std::strtoull(v.c_str(), &end, 10);
  if (end == v.c_str() || *end != '\0' || v.find('-') != std::string::npos) {
    bad_value(section, key, v, "non-negative integer");
  }
  return parsed;
}

std::uint64_t ConfigFile::get_uint64(const std::string& section, const std::string& key,
                                     std::uint64_t fallback) const {
  return has(section, key) ? get_uint64(section, key) : fallback;
}

std::vector<int> ConfigFile::get_int_list(const std::string& section,
                                          const std::string& key) const {
  const std::string v = get_string(section, key);
  std::vector<int> out;
  std::istringstream in(v);
  std::string item;
  while (std::getline(in, item, ',')) {
    const std::string t = trim(item);
    char* end = nullptr;
    const long parsed = std::strtol(t.c_str(), &end, 10);
    if (t.empty() || end == t.c_str() || *end != '\0') bad_value(section, key, v, "integer list");
    out.push_back(static_cast<int>(parsed));
  }
  if (out.empty()) bad_value(section, key, v, "integer list");
  return out;
}

std::vector<double> ConfigFile::get_double_list(const std::string& section,
                                                const std::string& key) const {
  const std::string v = get_string(section, key);
  std::vector<double> out;
  std::istringstream in(v);
  std::string item;
  while (std::getline(in, item, ',')) {
    const std::string t = trim(item);
    char* end = nullptr;
    const double parsed = std::strtod(t.c_str(), &end);
    if (t.empty() || end == t.c_str() || *end != '\0') bad_value(section, key, v, "number list");
    out.push_back(parsed);
  }
  if (out.empty()) bad_value(section, key, v, "number list");
  return out;
}

ConfigFile parse_config_text(const std::string& text) {
  ConfigFile config;
  std::istringstream in(text);
  std::string line;
  std::string section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#' || t[0] == ';') continue;
    if (t.front() == '[') {
      if (t.back() != ']' || t.size() < 3) {
        throw ConfigError("config line " + std::to_string(lineno) + ": malformed section header");
      }
      section = trim(t.substr(1, t.size() - 2));
      continue;
    }
    const std::size_t eq = t.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
    }
    const std::string key = trim(t.substr(0, eq));
    if (key.empty()) {
      throw ConfigError("config line " + std::to_string(lineno) + ": empty key");
    }
    config.set(section, key, trim(t.substr(eq + 1)));
  }
  return config;
}

ConfigFile load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open config: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str());
}

std::string canonical_config_text(const ConfigFile& config) {
  std::string out;
  for (const auto& [section, entries] : config.sections()) {
    out += "[" + section + "]\n";
    for (const auto& [key, value] : entries) out += key + " = " + value + "\n";
  }
  return out;
}

std::uint64_t config_hash(const ConfigFile& config) {
  std::uint64_t h = 14695981039346656037ULL;
  for (char c : canonical_config_text(config)) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ULL;
  }
  return h;
}

}  // namespace retro
