#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace meshroll {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Flat key-value tree with dotted paths ("atomic.period_ms = 250"), '#'
// comments, one assignment per line. Lists are comma-separated. The
// effective, fully-resolved view is echoed into every output directory.
class Config {
public:
    Config() = default;

    static Config parse_file(const std::string& path);
    static Config parse_string(const std::string& text);

    void set(const std::string& key, const std::string& value) { values_[key] = value; }
    bool has(const std::string& key) const { return values_.count(key) > 0; }

    std::string get_str(const std::string& key, const std::string& fallback) const;
    double get_double(const std::string& key, double fallback) const;
    std::int64_t get_int(const std::string& key, std::int64_t fallback) const;
    bool get_bool(const std::string& key, bool fallback) const;
    std::vector<std::int64_t> get_int_list(const std::string& key,
                                           std::vector<std::int64_t> fallback) const;
    std::vector<double> get_double_list(const std::string& key,
                                        std::vector<double> fallback) const;

    // Records every key a consumer asked for; anything left over is a typo.
    std::vector<std::string> unknown_keys() const;
    std::string serialize() const;  // sorted, parseable echo

    const std::map<std::string, std::string>& values() const { return values_; }

private:
    std::map<std::string, std::string> values_;
    mutable std::map<std::string, bool> touched_;
};

}  // namespace meshroll
