#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace lomap {

// Flat key=value settings. Files hold one pair per line; '#' starts a
// comment and blank lines are skipped. Later assignments overwrite earlier
// ones, which is how command-line overrides beat file contents. Typed
// getters reject malformed values rather than guessing.
class Config {
 public:
  Config() = default;

  static Config from_file(const std::string& path);
  static Config from_text(const std::string& text);

  void set(const std::string& key, const std::string& value);
  void merge(const Config& overrides);
  bool has(const std::string& key) const;

  std::string get_string(const std::string& key,
                         const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  long get_long(const std::string& key, long fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::vector<long> get_long_list(const std::string& key,
                                  const std::vector<long>& fallback) const;

  // Rejects any key outside `allowed`; commands call this so that typos
  // fail loudly instead of silently using defaults.
  void restrict_keys(const std::set<std::string>& allowed) const;

  // FNV-1a over canonical "key=value\n" lines in sorted key order, so the
  // hash is independent of assignment order.
  std::uint64_t hash() const;

  const std::map<std::string, std::string>& items() const { return kv_; }

 private:
  std::map<std::string, std::string> kv_;
};

}  // namespace lomap
