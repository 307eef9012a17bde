#include "lomap/config.hpp"

#include <cctype>
#include <cerrno>
#include <cstdlib>

#include "lomap/error.hpp"
#include "lomap/io.hpp"

namespace lomap {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

}  // namespace

Config Config::from_file(const std::string& path) {
  return from_text(io::read_text_file(path));
}

Config Config::from_text(const std::string& text) {
  Config cfg;
  std::string line;
  std::size_t line_no = 0;
  auto handle = [&](const std::string& raw) {
    ++line_no;
    std::string s = raw;
    const std::size_t hash = s.find('#');
    if (hash != std::string::npos) s.erase(hash);
    s = trim(s);
    if (s.empty()) return;
    const std::size_t eq = s.find('=');
    require_param(eq != std::string::npos,
                  "config line " + std::to_string(line_no) +
                      " is not key=value: " + trim(raw));
    const std::string key = trim(s.substr(0, eq));
    const std::string value = trim(s.substr(eq + 1));
    require_param(!key.empty(),
                  "config line " + std::to_string(line_no) + " has no key");
    cfg.set(key, value);
  };
  for (char ch : text) {
    if (ch == '\n') {
      handle(line);
      line.clear();
    } else if (ch != '\r') {
      line.push_back(ch);
    }
  }
  if (!line.empty()) handle(line);
  return cfg;
}

void Config::set(const std::string& key, const std::string& value) {
  require_param(!key.empty() && key.find('=') == std::string::npos &&
                    key.find('\n') == std::string::npos,
                "bad config key: " + key);
  require_param(value.find('\n') == std::string::npos,
                "config value must be a single line");
  kv_[key] = value;
}

void Config::merge(const Config& overrides) {
  for (const auto& [k, v] : overrides.kv_) kv_[k] = v;
}

bool Config::has(const std::string& key) const { return kv_.count(key) > 0; }

std::string Config::get_string(const std::string& key,
                               const std::string& fallback) const {
  const auto it = kv_.find(key);
  return it == kv_.end() ? fallback : it->second;
}

double Config::get_double(const std::string& key, double fallback) const {
  const auto it = kv_.find(key);
  if (it == kv_.end()) return fallback;
  const std::string& v = it->second;
  errno = 0;
  char* end = nullptr;
  const double parsed = std::strtod(v.c_str(), &end);
  require_param(!v.empty() && end == v.c_str() + v.size() && errno == 0,
                "config key " + key + " is not a number: " + v);
  return parsed;
}

long Config::get_long(const std::string& key, long fallback) const {
  const auto it = kv_.find(key);
  if (it == kv_.end()) return fallback;
  const std::string& v = it->second;
  errno = 0;
  char* end = nullptr;
  const long parsed = std::strtol(v.c_str(), &end, 10);
  require_param(!v.empty() && end == v.c_str() + v.size() && errno == 0,
                "config key " + key + " is not an integer: " + v);
  return parsed;
}

bool Config::get_bool(const std::string& key, bool fallback) const {
  const auto it = kv_.find(key);
  if (it == kv_.end()) return fallback;
  const std::string& v = it->second;
  if (v == "1" || v == "true") return true;
  if (v == "0" || v == "false") return false;
  fail_param("config key " + key + " is not a boolean: " + v);
}

std::vector<long> Config::get_long_list(
    const std::string& key, const std::vector<long>& fallback) const {
  const auto it = kv_.find(key);
  if (it == kv_.end()) return fallback;
  const std::string& v = it->second;
  std::vector<long> out;
  std::string part;
  auto flush = [&]() {
    const std::string p = trim(part);
    require_param(!p.empty(), "config key " + key + " has an empty element");
    errno = 0;
    char* end = nullptr;
    const long parsed = std::strtol(p.c_str(), &end, 10);
    require_param(end == p.c_str() + p.size() && errno == 0,
                  "config key " + key + " is not an integer list: " + v);
    out.push_back(parsed);
    part.clear();
  };
  for (char ch : v) {
    if (ch == ',') {
      flush();
    } else {
      part.push_back(ch);
    }
  }
  flush();
  return out;
}

void Config::restrict_keys(const std::set<std::string>& allowed) const {
  for (const auto& [k, v] : kv_) {
    require_param(allowed.count(k) > 0, "unknown config key: " + k);
  }
}

std::uint64_t Config::hash() const {
  std::uint64_t h = io::kFnvOffset;
  for (const auto& [k, v] : kv_) {
    const std::string line = k + "=" + v + "\n";
    h = io::fnv1a64(line.data(), line.size(), h);
  }
  return h;
}

}  // namespace lomap
