#pragma once

#include <istream>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace lvt {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Ordered key=value sections. Lines starting with '#' or ';' are comments.
struct IniFile {
  struct Section {
    std::string name;
    std::vector<std::pair<std::string, std::string>> entries;

    std::optional<std::string> get(const std::string& key) const;
    std::string get_str(const std::string& key, const std::string& fallback) const;
    double get_double(const std::string& key, double fallback) const;
    int get_int(const std::string& key, int fallback) const;
    long long get_ll(const std::string& key, long long fallback) const;
    bool get_bool(const std::string& key, bool fallback) const;
  };

  std::vector<Section> sections;

  static IniFile parse(std::istream& in);
  static IniFile load(const std::string& path);  // throws ConfigError

  const Section* find(const std::string& name) const;
  std::vector<const Section*> find_all(const std::string& name) const;
};

std::string trim(const std::string& s);
std::vector<std::string> split_ws(const std::string& s);

}  // namespace lvt
