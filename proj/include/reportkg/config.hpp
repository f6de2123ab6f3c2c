#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace reportkg {

/// Flat `key = value` configuration shared by every module.
///
/// Syntax: one entry per line, `#` starts a comment line, keys are dotted
/// (`unit.V`, `cost.setup`, `llm.backend`). Later entries override earlier ones.
/// List-valued keys use comma separation.
class KeyValueConfig {
public:
    KeyValueConfig() = default;

    static KeyValueConfig parse(std::string_view text);
    static KeyValueConfig load(const std::filesystem::path& path);

    void set(std::string key, std::string value);
    bool contains(std::string_view key) const;
    std::optional<std::string> get(std::string_view key) const;
    std::string get_or(std::string_view key, std::string fallback) const;
    std::optional<double> get_number(std::string_view key) const;
    std::vector<std::string> get_list(std::string_view key) const;

    /// Every entry whose key starts with `prefix`, keyed by the remainder.
    std::map<std::string, std::string> section(std::string_view prefix) const;

    const std::map<std::string, std::string, std::less<>>& entries() const { return entries_; }

    /// Directory of the file this config was loaded from; relative paths resolve against it.
    const std::filesystem::path& base_dir() const { return base_dir_; }
    std::filesystem::path resolve_path(std::string_view key) const;

private:
    std::map<std::string, std::string, std::less<>> entries_;
    std::filesystem::path base_dir_ = ".";
};

std::string trim(std::string_view text);
std::vector<std::string> split(std::string_view text, char separator);
std::string to_lower_ascii(std::string_view text);

}  // namespace reportkg
