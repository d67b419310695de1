#include "umom/flatconfig.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "umom/errors.hpp"

namespace umom {

namespace {

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r");
    if (begin == std::string::npos) return {};
    const auto end = s.find_last_not_of(" \t\r");
    return s.substr(begin, end - begin + 1);
}

}  // namespace

std::string format_double(double value) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
    (void)ec;
    return std::string(buf, ptr);
}

double parse_double(const std::string& text, const std::string& key_for_error) {
    double value = 0.0;
    const char* begin = text.data();
    const char* end = begin + text.size();
    auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc{} || ptr != end) {
        throw ConfigError("key '" + key_for_error + "': not a number: '" + text + "'",
                          key_for_error);
    }
    return value;
}

std::int64_t parse_int(const std::string& text, const std::string& key_for_error) {
    std::int64_t value = 0;
    const char* begin = text.data();
    const char* end = begin + text.size();
    auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc{} || ptr != end) {
        throw ConfigError("key '" + key_for_error + "': not an integer: '" + text + "'",
                          key_for_error);
    }
    return value;
}

std::uint64_t parse_uint64(const std::string& text, const std::string& key_for_error) {
    std::uint64_t value = 0;
    const char* begin = text.data();
    const char* end = begin + text.size();
    auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc{} || ptr != end) {
        throw ConfigError("key '" + key_for_error + "': not an unsigned integer: '" + text + "'",
                          key_for_error);
    }
    return value;
}

FlatConfig FlatConfig::parse(const std::string& text) {
    FlatConfig config;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("line " + std::to_string(lineno) + ": expected key=value, got '" +
                                  line + "'",
                              line);
        }
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (key.empty()) {
            throw ConfigError("line " + std::to_string(lineno) + ": empty key", key);
        }
        if (config.entries_.count(key) != 0) {
            throw ConfigError("duplicate key '" + key + "'", key);
        }
        config.entries_.emplace(std::move(key), std::move(value));
    }
    return config;
}

FlatConfig FlatConfig::parse_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open config file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse(buf.str());
}

bool FlatConfig::has(const std::string& key) const { return entries_.count(key) != 0; }

void FlatConfig::set(const std::string& key, const std::string& value) {
    entries_[key] = value;
}

std::string FlatConfig::get_string(const std::string& key) const {
    auto it = entries_.find(key);
    if (it == entries_.end()) throw ConfigError("missing required key '" + key + "'", key);
    return it->second;
}

std::string FlatConfig::get_string_or(const std::string& key, const std::string& fallback) const {
    auto it = entries_.find(key);
    return it == entries_.end() ? fallback : it->second;
}

double FlatConfig::get_double(const std::string& key) const {
    return parse_double(get_string(key), key);
}

double FlatConfig::get_double_or(const std::string& key, double fallback) const {
    auto it = entries_.find(key);
    return it == entries_.end() ? fallback : parse_double(it->second, key);
}

std::int64_t FlatConfig::get_int(const std::string& key) const {
    return parse_int(get_string(key), key);
}

std::int64_t FlatConfig::get_int_or(const std::string& key, std::int64_t fallback) const {
    auto it = entries_.find(key);
    return it == entries_.end() ? fallback : parse_int(it->second, key);
}

std::uint64_t FlatConfig::get_uint64(const std::string& key) const {
    return parse_uint64(get_string(key), key);
}

bool FlatConfig::get_bool_or(const std::string& key, bool fallback) const {
    auto it = entries_.find(key);
    if (it == entries_.end()) return fallback;
    const std::string& v = it->second;
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw ConfigError("key '" + key + "': not a boolean: '" + v + "'", key);
}

void FlatConfig::require_known_keys(const std::vector<std::string>& allowed) const {
    for (const auto& [key, value] : entries_) {
        bool known = false;
        for (const auto& candidate : allowed) {
            if (candidate == key) {
                known = true;
                break;
            }
        }
        if (!known) throw ConfigError("unknown config key '" + key + "'", key);
    }
}

std::string FlatConfig::serialize() const {
    std::string out;
    for (const auto& [key, value] : entries_) {
        out += key;
        out += '=';
        out += value;
        out += '\n';
    }
    return out;
}

}  // namespace umom
