#pragma once

#include <filesystem>
#include <istream>
#include <map>
#include <string>
#include <vector>

namespace superpure {

/// Flat `key = value` settings. Blank lines and `#` comments are ignored;
/// keys may use `-` or `_` interchangeably and are stored with `_`.
class KeyValues {
 public:
  static KeyValues parse(std::istream& in, const std::string& source = "<stream>");
  static KeyValues load(const std::filesystem::path& path);

  bool has(const std::string& key) const { return values_.contains(key); }
  void set(const std::string& key, std::string value);

  std::string get_string(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  long long get_int(const std::string& key, long long fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  /// Comma-separated list of numbers.
  std::vector<double> get_doubles(const std::string& key) const;

  /// Keys that were set but never read through a getter.
  std::vector<std::string> unused() const;

 private:
  std::map<std::string, std::string> values_;
  mutable std::map<std::string, bool> used_;
};

std::vector<double> parse_number_list(const std::string& text);

}  // namespace superpure
