#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace okan::app {

/// Flat `key = value` configuration. `#` starts a comment; blank lines are ignored.
class Config {
public:
    static Config load(const std::filesystem::path& path);
    static Config parse(std::string_view text, const std::string& origin = "<string>");

    void set(const std::string& key, const std::string& value);
    /// Applies one `key=value` override.
    void apply_override(std::string_view assignment);

    bool has(const std::string& key) const { return entries_.count(key) != 0; }
    const std::map<std::string, std::string>& entries() const { return entries_; }

    std::string get_string(const std::string& key, const std::string& fallback) const;
    double get_double(const std::string& key, double fallback) const;
    std::size_t get_size(const std::string& key, std::size_t fallback) const;
    std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const;
    /// Comma-separated lists.
    std::vector<std::size_t> get_sizes(const std::string& key, const std::vector<std::size_t>& fallback) const;
    std::vector<double> get_doubles(const std::string& key, const std::vector<double>& fallback) const;

private:
    std::map<std::string, std::string> entries_;
};

}  // namespace okan::app
