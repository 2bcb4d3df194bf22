#pragma once

/**
 * @file config.hpp
 * @brief Flat `key = value` configuration with command-line overrides.
 *
 *   # comment
 *   data.path = "data/prices.csv"
 *   horizon.T = 1, 2
 *
 * Values may be quoted; lists are comma separated. Every failure names the key.
 */

#include <filesystem>
#include <istream>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace mvdro {

class Config {
public:
    static Config parse(std::istream& in, const std::string& source = "<config>");
    static Config load(const std::filesystem::path& path);

    /// Applies "key=value".
    void apply_override(const std::string& assignment);
    void set(const std::string& key, const std::string& value);

    bool has(const std::string& key) const;
    const std::map<std::string, std::string>& entries() const { return values_; }

    std::string get_string(const std::string& key) const;
    std::string get_string(const std::string& key, const std::string& fallback) const;
    double get_double(const std::string& key, double fallback) const;
    long long get_int(const std::string& key, long long fallback) const;
    bool get_bool(const std::string& key, bool fallback) const;
    std::vector<std::string> get_list(const std::string& key, const std::vector<std::string>& fallback) const;

private:
    std::map<std::string, std::string> values_;
};

}  // namespace mvdro
