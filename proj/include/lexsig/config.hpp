#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace lexsig {

// A value from a TOML-style config file: string, number, bool or a flat array.
struct ConfigValue {
    enum class Kind { string, integer, real, boolean, array };

    Kind kind = Kind::string;
    std::string text;  // string payload, or the literal as written
    std::int64_t integer = 0;
    double real = 0.0;
    bool boolean = false;
    std::vector<ConfigValue> items;

    std::string canonical() const;
};

// Parses one literal: "quoted", 12, 1.5e-3, true, [a, b]. With `bare_strings`
// an unquoted token that is not a number or bool is taken as a string.
ConfigValue parse_config_value(const std::string& literal, bool bare_strings = false);

// Flat dotted-key view of a config file. `[section]` headers prefix the keys
// that follow them.
class Config {
public:
    static Config parse(const std::string& text, const std::string& source = "<config>");
    static Config load(const std::filesystem::path& path);

    void set(const std::string& key, ConfigValue value);
    // Parses `literal` leniently (bare strings allowed).
    void set_literal(const std::string& key, const std::string& literal);

    bool has(const std::string& key) const { return values_.count(key) > 0; }
    const std::map<std::string, ConfigValue>& values() const noexcept { return values_; }

    std::string get_string(const std::string& key, const std::string& fallback = {}) const;
    std::int64_t get_int(const std::string& key, std::int64_t fallback) const;
    double get_double(const std::string& key, double fallback) const;
    bool get_bool(const std::string& key, bool fallback) const;
    std::vector<std::int64_t> get_int_list(const std::string& key, const std::vector<std::int64_t>& fallback) const;
    std::vector<double> get_double_list(const std::string& key, const std::vector<double>& fallback) const;
    std::vector<std::string> get_string_list(const std::string& key, const std::vector<std::string>& fallback) const;

    // Relative paths are resolved against the config file's directory.
    std::filesystem::path get_path(const std::string& key) const;
    const std::filesystem::path& base_dir() const noexcept { return base_dir_; }
    void set_base_dir(std::filesystem::path dir) { base_dir_ = std::move(dir); }

    // 16 hex digits over the canonical form of every key starting with one
    // of `prefixes`.
    std::string hash(const std::vector<std::string>& prefixes) const;

private:
    const ConfigValue* find(const std::string& key) const;

    std::map<std::string, ConfigValue> values_;
    std::filesystem::path base_dir_;
};

}  // namespace lexsig
