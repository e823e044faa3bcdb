#include "lexsig/config.hpp"

#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

#include "lexsig/error.hpp"
#include "lexsig/io.hpp"
#include "lexsig/tokens.hpp"

namespace lexsig {

namespace {

std::string trim(std::string_view s) {
    auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

// Strips a trailing `# comment` outside quotes.
std::string strip_comment(const std::string& line) {
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        if (line[i] == '"' && (i == 0 || line[i - 1] != '\\')) quoted = !quoted;
        if (line[i] == '#' && !quoted) return line.substr(0, i);
    }
    return line;
}

std::vector<std::string> split_array(const std::string& body) {
    std::vector<std::string> parts;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < body.size(); ++i) {
        char ch = body[i];
        if (ch == '"' && (i == 0 || body[i - 1] != '\\')) quoted = !quoted;
        if (ch == ',' && !quoted) {
            parts.push_back(trim(cur));
            cur.clear();
        } else {
            cur += ch;
        }
    }
    if (!trim(cur).empty()) parts.push_back(trim(cur));
    return parts;
}

std::string unquote(const std::string& s) {
    std::string out;
    for (std::size_t i = 1; i + 1 < s.size(); ++i) {
        if (s[i] == '\\' && i + 2 < s.size()) {
            ++i;
            out += s[i] == 'n' ? '\n' : s[i] == 't' ? '\t' : s[i];
        } else {
            out += s[i];
        }
    }
    return out;
}

}  // namespace

ConfigValue parse_config_value(const std::string& raw, bool bare_strings) {
    const std::string lit = trim(raw);
    ConfigValue v;
    v.text = lit;
    if (lit.empty()) {
        if (bare_strings) return v;
        throw Error(ErrorCode::usage, "empty config value");
    }
    if (lit.front() == '[') {
        if (lit.back() != ']') throw Error(ErrorCode::usage, "unterminated array: " + lit);
        v.kind = ConfigValue::Kind::array;
        for (const auto& part : split_array(lit.substr(1, lit.size() - 2)))
            v.items.push_back(parse_config_value(part, bare_strings));
        return v;
    }
    if (lit.front() == '"') {
        if (lit.size() < 2 || lit.back() != '"') throw Error(ErrorCode::usage, "unterminated string: " + lit);
        v.text = unquote(lit);
        return v;
    }
    if (lit == "true" || lit == "false") {
        v.kind = ConfigValue::Kind::boolean;
        v.boolean = lit == "true";
        return v;
    }
    std::int64_t i = 0;
    auto [pi, ei] = std::from_chars(lit.data(), lit.data() + lit.size(), i);
    if (ei == std::errc{} && pi == lit.data() + lit.size()) {
        v.kind = ConfigValue::Kind::integer;
        v.integer = i;
        v.real = static_cast<double>(i);
        return v;
    }
    double d = 0.0;
    auto [pd, ed] = std::from_chars(lit.data(), lit.data() + lit.size(), d);
    if (ed == std::errc{} && pd == lit.data() + lit.size()) {
        v.kind = ConfigValue::Kind::real;
        v.real = d;
        return v;
    }
    if (bare_strings) return v;
    throw Error(ErrorCode::usage, "cannot parse config value: " + lit);
}

std::string ConfigValue::canonical() const {
    switch (kind) {
    case Kind::string: return "\"" + text + "\"";
    case Kind::integer: return std::to_string(integer);
    case Kind::real: return format_double(real);
    case Kind::boolean: return boolean ? "true" : "false";
    case Kind::array: {
        std::string out = "[";
        for (std::size_t i = 0; i < items.size(); ++i) out += (i ? "," : "") + items[i].canonical();
        return out + "]";
    }
    }
    return {};
}

Config Config::parse(const std::string& text, const std::string& source) {
    Config cfg;
    std::istringstream in(text);
    std::string line, section;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string s = trim(strip_comment(line));
        if (s.empty()) continue;
        if (s.front() == '[' && s.find('=') == std::string::npos) {
            if (s.back() != ']') throw FormatError(source, lineno, "bad section header");
            section = trim(s.substr(1, s.size() - 2));
            continue;
        }
        auto eq = s.find('=');
        if (eq == std::string::npos) throw FormatError(source, lineno, "expected key = value");
        const std::string key = trim(s.substr(0, eq));
        if (key.empty()) throw FormatError(source, lineno, "empty key");
        try {
            cfg.set(section.empty() ? key : section + "." + key, parse_config_value(s.substr(eq + 1)));
        } catch (const Error& e) {
            throw FormatError(source, lineno, e.what());
        }
    }
    return cfg;
}

Config Config::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::usage, "cannot open config " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    Config cfg = parse(ss.str(), path.string());
    cfg.base_dir_ = std::filesystem::absolute(path).parent_path();
    return cfg;
}

void Config::set(const std::string& key, ConfigValue value) { values_[key] = std::move(value); }

void Config::set_literal(const std::string& key, const std::string& literal) {
    set(key, parse_config_value(literal, true));
}

const ConfigValue* Config::find(const std::string& key) const {
    auto it = values_.find(key);
    return it == values_.end() ? nullptr : &it->second;
}

namespace {

[[noreturn]] void wrong_type(const std::string& key, const char* want) {
    throw Error(ErrorCode::usage, "config key '" + key + "' must be " + want);
}

}  // namespace

std::string Config::get_string(const std::string& key, const std::string& fallback) const {
    const auto* v = find(key);
    if (!v) return fallback;
    if (v->kind == ConfigValue::Kind::array) wrong_type(key, "a scalar");
    return v->kind == ConfigValue::Kind::string ? v->text : v->canonical();
}

std::int64_t Config::get_int(const std::string& key, std::int64_t fallback) const {
    const auto* v = find(key);
    if (!v) return fallback;
    if (v->kind != ConfigValue::Kind::integer) wrong_type(key, "an integer");
    return v->integer;
}

double Config::get_double(const std::string& key, double fallback) const {
    const auto* v = find(key);
    if (!v) return fallback;
    if (v->kind != ConfigValue::Kind::integer && v->kind != ConfigValue::Kind::real) wrong_type(key, "a number");
    return v->real;
}

bool Config::get_bool(const std::string& key, bool fallback) const {
    const auto* v = find(key);
    if (!v) return fallback;
    if (v->kind != ConfigValue::Kind::boolean) wrong_type(key, "true or false");
    return v->boolean;
}

namespace {

// A scalar where a list is expected counts as a one-element list.
std::vector<ConfigValue> as_items(const ConfigValue& v) {
    if (v.kind == ConfigValue::Kind::array) return v.items;
    return {v};
}

}  // namespace

std::vector<std::int64_t> Config::get_int_list(const std::string& key, const std::vector<std::int64_t>& fallback) const {
    const auto* v = find(key);
    if (!v) return fallback;
    std::vector<std::int64_t> out;
    for (const auto& item : as_items(*v)) {
        if (item.kind != ConfigValue::Kind::integer) wrong_type(key, "a list of integers");
        out.push_back(item.integer);
    }
    return out;
}

std::vector<double> Config::get_double_list(const std::string& key, const std::vector<double>& fallback) const {
    const auto* v = find(key);
    if (!v) return fallback;
    std::vector<double> out;
    for (const auto& item : as_items(*v)) {
        if (item.kind != ConfigValue::Kind::integer && item.kind != ConfigValue::Kind::real)
            wrong_type(key, "a list of numbers");
        out.push_back(item.real);
    }
    return out;
}

std::vector<std::string> Config::get_string_list(const std::string& key,
                                                 const std::vector<std::string>& fallback) const {
    const auto* v = find(key);
    if (!v) return fallback;
    std::vector<std::string> out;
    for (const auto& item : as_items(*v)) {
        if (item.kind == ConfigValue::Kind::array) wrong_type(key, "a flat list");
        out.push_back(item.kind == ConfigValue::Kind::string ? item.text : item.canonical());
    }
    return out;
}

std::filesystem::path Config::get_path(const std::string& key) const {
    const std::string s = get_string(key);
    if (s.empty()) return {};
    std::filesystem::path p(s);
    return p.is_absolute() || base_dir_.empty() ? p : base_dir_ / p;
}

std::string Config::hash(const std::vector<std::string>& prefixes) const {
    std::string canon;
    for (const auto& [key, value] : values_) {
        bool match = false;
        for (const auto& p : prefixes) match = match || key == p || key.rfind(p + ".", 0) == 0;
        if (match) canon += key + "=" + value.canonical() + "\n";
    }
    TokenSeq single{canon};
    return context_id(single);
}

}  // namespace lexsig
