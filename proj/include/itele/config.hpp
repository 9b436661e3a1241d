#pragma once

#include <map>
#include <string>
#include <vector>

namespace itele {

/// Flat key=value configuration file. '#' starts a comment, blank lines are
/// ignored, keys may repeat (last one wins). Throws ConfigError on anything
/// that does not parse.
class Config {
  public:
    Config() = default;

    static Config from_file(const std::string& path);
    static Config from_string(const std::string& text);

    bool has(const std::string& key) const;

    std::string get_str(const std::string& key, const std::string& def = "") const;
    std::string require_str(const std::string& key) const;  // throws ConfigError if absent
    long long get_int(const std::string& key, long long def) const;
    double get_double(const std::string& key, double def) const;
    bool get_bool(const std::string& key, bool def) const;

    void set(const std::string& key, const std::string& value);

    const std::map<std::string, std::string>& entries() const { return values_; }

  private:
    std::map<std::string, std::string> values_;
};

}  // namespace itele
