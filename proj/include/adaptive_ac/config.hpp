#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace adaptive_ac {

// Flat `key = value` settings, one per line, `#` starts a comment. Later
// entries override earlier ones.
class ConfigMap {
 public:
  static ConfigMap parse(std::istream& in, const std::string& source = "<config>");
  static ConfigMap load(const std::string& path);

  void set(const std::string& key, const std::string& value);
  bool contains(const std::string& key) const;
  const std::map<std::string, std::string>& entries() const { return entries_; }

  // Typed accessors; throw std::invalid_argument naming the key on bad input.
  std::string get_string(const std::string& key, const std::string& fallback) const;
  double get_real(const std::string& key, double fallback) const;
  long long get_int(const std::string& key, long long fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::vector<double> get_reals(const std::string& key,
                                const std::vector<double>& fallback) const;

 private:
  std::map<std::string, std::string> entries_;
};

double parse_real(const std::string& text, const std::string& what);
long long parse_int(const std::string& text, const std::string& what);
bool parse_bool(const std::string& text, const std::string& what);
// Comma-separated reals.
std::vector<double> parse_reals(const std::string& text, const std::string& what);

}  // namespace adaptive_ac
