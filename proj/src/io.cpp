#include "lexsig/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>

#include "lexsig/error.hpp"

namespace lexsig {

std::string format_double(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), x);
    return std::string(buf, res.ptr);
}

double parse_double(std::string_view s, const std::string& source, std::size_t line) {
    while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\r')) s.remove_suffix(1);
    if (s == "inf") return INFINITY;
    if (s == "-inf") return -INFINITY;
    double v = 0.0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size())
        throw FormatError(source, line, "not a number: '" + std::string(s) + "'");
    return v;
}

long long parse_int(std::string_view s, const std::string& source, std::size_t line) {
    while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\r')) s.remove_suffix(1);
    long long v = 0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size())
        throw FormatError(source, line, "not an integer: '" + std::string(s) + "'");
    return v;
}

void for_each_data_line(const std::filesystem::path& path,
                        const std::function<void(std::size_t, const std::string&)>& fn) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::format, "cannot open " + path.string());
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        if (line.find_first_not_of(" \t") == std::string::npos) continue;
        fn(lineno, line);
    }
}

std::string read_header_comment(const std::filesystem::path& path) {
    std::ifstream in(path);
    std::string line;
    if (in && std::getline(in, line) && !line.empty() && line[0] == '#') return line;
    return {};
}

std::size_t CsvTable::column(const std::string& name) const {
    if (auto idx = find_column(name)) return *idx;
    throw FormatError("csv", 1, "missing column '" + name + "'");
}

std::optional<std::size_t> CsvTable::find_column(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
        if (header[i] == name) return i;
    return std::nullopt;
}

std::vector<std::string> split_csv_line(std::string_view line) {
    std::vector<std::string> out;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cur += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cur += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            out.push_back(std::move(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(std::move(cur));
    return out;
}

CsvTable read_csv(const std::filesystem::path& path) {
    CsvTable table;
    bool have_header = false;
    for_each_data_line(path, [&](std::size_t lineno, const std::string& line) {
        auto fields = split_csv_line(line);
        if (!have_header) {
            table.header = std::move(fields);
            have_header = true;
            return;
        }
        if (fields.size() != table.header.size())
            throw FormatError(path.string(), lineno,
                              "expected " + std::to_string(table.header.size()) + " fields, got " +
                                  std::to_string(fields.size()));
        table.rows.push_back(std::move(fields));
        table.line_numbers.push_back(lineno);
    });
    if (!have_header) throw FormatError(path.string(), 1, "missing CSV header");
    return table;
}

std::string csv_escape(std::string_view field) {
    if (field.find_first_of(",\"\n") == std::string_view::npos) return std::string(field);
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

void write_csv_row(std::ostream& out, const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) out << ',';
        out << csv_escape(fields[i]);
    }
    out << '\n';
}

void write_file_atomic(const std::filesystem::path& path, const std::function<void(std::ostream&)>& fn) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) throw Error(ErrorCode::format, "cannot write " + tmp.string());
        fn(out);
        if (!out) throw Error(ErrorCode::format, "write failed for " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

}  // namespace lexsig
