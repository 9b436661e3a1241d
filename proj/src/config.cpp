#include "itele/config.hpp"

#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

#include "itele/common.hpp"

namespace itele {

static std::string trim(std::string_view s) {
    size_t b = 0;
    size_t e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b])))
        ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1])))
        --e;
    return std::string(s.substr(b, e - b));
}

Config Config::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot open config file: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return from_string(buf.str());
}

Config Config::from_string(const std::string& text) {
    Config cfg;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos)
            line.erase(hash);
        std::string stripped = trim(line);
        if (stripped.empty())
            continue;
        auto eq = stripped.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(lineno) + ": expected key=value");
        std::string key = trim(std::string_view(stripped).substr(0, eq));
        std::string value = trim(std::string_view(stripped).substr(eq + 1));
        if (key.empty())
            throw ConfigError("config line " + std::to_string(lineno) + ": empty key");
        cfg.values_[key] = value;
    }
    return cfg;
}

bool Config::has(const std::string& key) const {
    return values_.count(key) != 0;
}

std::string Config::get_str(const std::string& key, const std::string& def) const {
    auto it = values_.find(key);
    return it == values_.end() ? def : it->second;
}

std::string Config::require_str(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end())
        throw ConfigError("missing required config key: " + key);
    return it->second;
}

long long Config::get_int(const std::string& key, long long def) const {
    auto it = values_.find(key);
    if (it == values_.end())
        return def;
    const std::string& v = it->second;
    long long out = 0;
    auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc{} || p != v.data() + v.size())
        throw ConfigError("config key " + key + ": not an integer: " + v);
    return out;
}

double Config::get_double(const std::string& key, double def) const {
    auto it = values_.find(key);
    if (it == values_.end())
        return def;
    const std::string& v = it->second;
    try {
        size_t pos = 0;
        double out = std::stod(v, &pos);
        if (pos != v.size())
            throw ConfigError("");
        return out;
    } catch (const std::exception&) {
        throw ConfigError("config key " + key + ": not a number: " + v);
    }
}

bool Config::get_bool(const std::string& key, bool def) const {
    auto it = values_.find(key);
    if (it == values_.end())
        return def;
    const std::string& v = it->second;
    if (v == "true" || v == "1" || v == "yes" || v == "on")
        return true;
    if (v == "false" || v == "0" || v == "no" || v == "off")
        return false;
    throw ConfigError("config key " + key + ": not a boolean: " + v);
}

void Config::set(const std::string& key, const std::string& value) {
    values_[key] = value;
}

}  // namespace itele
