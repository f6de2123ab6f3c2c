#include "reportkg/config.hpp"

#include "reportkg/error.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

namespace reportkg {

std::string trim(std::string_view text) {
    const auto is_space = [](char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; };
    std::size_t begin = 0;
    std::size_t end = text.size();
    while (begin < end && is_space(text[begin])) {
        ++begin;
    }
    while (end > begin && is_space(text[end - 1])) {
        --end;
    }
    return std::string(text.substr(begin, end - begin));
}

std::vector<std::string> split(std::string_view text, char separator) {
    std::vector<std::string> parts;
    std::size_t start = 0;
    while (true) {
        const auto pos = text.find(separator, start);
        parts.emplace_back(text.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
        if (pos == std::string_view::npos) {
            break;
        }
        start = pos + 1;
    }
    return parts;
}

std::string to_lower_ascii(std::string_view text) {
    std::string out(text);
    for (auto& c : out) {
        c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    }
    return out;
}

KeyValueConfig KeyValueConfig::parse(std::string_view text) {
    KeyValueConfig config;
    std::istringstream in{std::string(text)};
    std::string line;
    int line_number = 0;
    while (std::getline(in, line)) {
        ++line_number;
        const std::string stripped = trim(line);
        if (stripped.empty() || stripped.front() == '#') {
            continue;
        }
        const auto eq = stripped.find('=');
        if (eq == std::string::npos) {
            throw Error(ErrorKind::ConfigError, "line " + std::to_string(line_number) + ": expected key = value");
        }
        std::string key = trim(std::string_view(stripped).substr(0, eq));
        if (key.empty()) {
            throw Error(ErrorKind::ConfigError, "line " + std::to_string(line_number) + ": empty key");
        }
        config.set(std::move(key), trim(std::string_view(stripped).substr(eq + 1)));
    }
    return config;
}

KeyValueConfig KeyValueConfig::load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error(ErrorKind::ConfigError, "cannot open config " + path.string());
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    KeyValueConfig config = parse(buffer.str());
    config.base_dir_ = path.has_parent_path() ? path.parent_path() : std::filesystem::path(".");
    return config;
}

void KeyValueConfig::set(std::string key, std::string value) { entries_[std::move(key)] = std::move(value); }

bool KeyValueConfig::contains(std::string_view key) const { return entries_.find(key) != entries_.end(); }

std::optional<std::string> KeyValueConfig::get(std::string_view key) const {
    const auto it = entries_.find(key);
    if (it == entries_.end()) {
        return std::nullopt;
    }
    return it->second;
}

std::string KeyValueConfig::get_or(std::string_view key, std::string fallback) const {
    auto value = get(key);
    return value ? *value : std::move(fallback);
}

std::optional<double> KeyValueConfig::get_number(std::string_view key) const {
    const auto value = get(key);
    if (!value) {
        return std::nullopt;
    }
    try {
        std::size_t used = 0;
        const double number = std::stod(*value, &used);
        if (used != value->size()) {
            throw Error(ErrorKind::ConfigError, std::string(key) + ": not a number: " + *value);
        }
        return number;
    } catch (const std::logic_error&) {
        throw Error(ErrorKind::ConfigError, std::string(key) + ": not a number: " + *value);
    }
}

std::vector<std::string> KeyValueConfig::get_list(std::string_view key) const {
    std::vector<std::string> items;
    const auto value = get(key);
    if (!value) {
        return items;
    }
    for (const auto& part : split(*value, ',')) {
        auto item = trim(part);
        if (!item.empty()) {
            items.push_back(std::move(item));
        }
    }
    return items;
}

std::map<std::string, std::string> KeyValueConfig::section(std::string_view prefix) const {
    std::map<std::string, std::string> out;
    for (auto it = entries_.lower_bound(prefix); it != entries_.end(); ++it) {
        if (it->first.compare(0, prefix.size(), prefix) != 0) {
            break;
        }
        out.emplace(it->first.substr(prefix.size()), it->second);
    }
    return out;
}

std::filesystem::path KeyValueConfig::resolve_path(std::string_view key) const {
    const auto value = get(key);
    if (!value) {
        throw Error(ErrorKind::ConfigError, "missing required key " + std::string(key));
    }
    std::filesystem::path path(*value);
    return path.is_absolute() ? path : base_dir_ / path;
}

}  // namespace reportkg
