#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace umom {

// The flat `key=value` config dialect: one pair per line, `#` comments,
// no sections. Parsing and formatting are locale-independent.
class FlatConfig {
public:
    FlatConfig() = default;

    static FlatConfig parse(const std::string& text);
    static FlatConfig parse_file(const std::string& path);

    bool has(const std::string& key) const;
    void set(const std::string& key, const std::string& value);

    // Typed getters; throw ConfigError naming the key on absence or on a
    // malformed value.
    std::string get_string(const std::string& key) const;
    std::string get_string_or(const std::string& key, const std::string& fallback) const;
    double get_double(const std::string& key) const;
    double get_double_or(const std::string& key, double fallback) const;
    std::int64_t get_int(const std::string& key) const;
    std::int64_t get_int_or(const std::string& key, std::int64_t fallback) const;
    std::uint64_t get_uint64(const std::string& key) const;
    bool get_bool_or(const std::string& key, bool fallback) const;

    // Unknown keys are a hard error: anything outside `allowed` throws
    // ConfigError naming the stray key.
    void require_known_keys(const std::vector<std::string>& allowed) const;

    const std::map<std::string, std::string>& entries() const { return entries_; }

    std::string serialize() const;

private:
    std::map<std::string, std::string> entries_;
};

// Locale-independent numeric formatting/parsing (shortest round-trip form).
std::string format_double(double value);
double parse_double(const std::string& text, const std::string& key_for_error);
std::int64_t parse_int(const std::string& text, const std::string& key_for_error);
std::uint64_t parse_uint64(const std::string& text, const std::string& key_for_error);

}  // namespace umom
