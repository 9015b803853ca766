#include "adaptive_ac/config.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <sstream>
#include <stdexcept>

namespace adaptive_ac {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

}  // namespace

double parse_real(const std::string& text, const std::string& what) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != text.size()) {
    throw std::invalid_argument(what + ": expected a number, got '" + text + "'");
  }
  return v;
}

long long parse_int(const std::string& text, const std::string& what) {
  std::size_t used = 0;
  long long v = 0;
  try {
    v = std::stoll(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != text.size()) {
    throw std::invalid_argument(what + ": expected an integer, got '" + text + "'");
  }
  return v;
}

bool parse_bool(const std::string& text, const std::string& what) {
  if (text == "true" || text == "1" || text == "yes" || text == "on") return true;
  if (text == "false" || text == "0" || text == "no" || text == "off") return false;
  throw std::invalid_argument(what + ": expected a boolean, got '" + text + "'");
}

std::vector<double> parse_reals(const std::string& text, const std::string& what) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(parse_real(item, what));
  }
  return out;
}

ConfigMap ConfigMap::parse(std::istream& in, const std::string& source) {
  ConfigMap cfg;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) {
      line.erase(hash);
    }
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument(source + ":" + std::to_string(lineno) +
                                  ": expected 'key = value'");
    }
    const std::string key = trim(line.substr(0, eq));
    if (key.empty()) {
      throw std::invalid_argument(source + ":" + std::to_string(lineno) +
                                  ": empty key");
    }
    cfg.set(key, trim(line.substr(eq + 1)));
  }
  return cfg;
}

ConfigMap ConfigMap::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file '" + path + "'");
  return parse(in, path);
}

void ConfigMap::set(const std::string& key, const std::string& value) {
  entries_[key] = value;
}

bool ConfigMap::contains(const std::string& key) const {
  return entries_.count(key) > 0;
}

std::string ConfigMap::get_string(const std::string& key,
                                  const std::string& fallback) const {
  const auto it = entries_.find(key);
  return it == entries_.end() ? fallback : it->second;
}

double ConfigMap::get_real(const std::string& key, double fallback) const {
  const auto it = entries_.find(key);
  return it == entries_.end() ? fallback : parse_real(it->second, key);
}

long long ConfigMap::get_int(const std::string& key, long long fallback) const {
  const auto it = entries_.find(key);
  return it == entries_.end() ? fallback : parse_int(it->second, key);
}

bool ConfigMap::get_bool(const std::string& key, bool fallback) const {
  const auto it = entries_.find(key);
  return it == entries_.end() ? fallback : parse_bool(it->second, key);
}

std::vector<double> ConfigMap::get_reals(const std::string& key,
                                         const std::vector<double>& fallback) const {
  const auto it = entries_.find(key);
  return it == entries_.end() ? fallback : parse_reals(it->second, key);
}

}  // namespace adaptive_ac
