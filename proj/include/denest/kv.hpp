#pragma once

#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "denest/common.hpp"

namespace denest {

// `key = value` file with '#' comments. Keeps line numbers so validation
// errors can point at the offending line.
class KeyValueFile {
 public:
  static KeyValueFile parse(std::istream& is, const std::string& origin = "<stream>");
  static KeyValueFile parse_file(const std::string& path);

  bool has(const std::string& key) const { return entries_.count(key) > 0; }

  std::string get_string(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  long long get_int(const std::string& key, long long fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::vector<double> get_doubles(const std::string& key,
                                  const std::vector<double>& fallback) const;
  std::vector<std::string> get_strings(const std::string& key,
                                       const std::vector<std::string>& fallback) const;

  // require the key to exist
  std::string require_string(const std::string& key) const;

  int line_of(const std::string& key) const;
  [[noreturn]] void fail(const std::string& key, const std::string& msg) const;
  const std::string& origin() const { return origin_; }
  std::vector<std::string> keys() const;

 private:
  struct Entry {
    std::string value;
    int line = 0;
  };
  std::map<std::string, Entry> entries_;
  std::string origin_;
};

}  // namespace denest
