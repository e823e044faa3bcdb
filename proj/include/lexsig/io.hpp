#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace lexsig {

// Shortest round-trip decimal form of a double.
std::string format_double(double x);

double parse_double(std::string_view s, const std::string& source, std::size_t line);
long long parse_int(std::string_view s, const std::string& source, std::size_t line);

// Calls `fn(line_number, line)` for every non-blank line that does not start
// with '#'.
void for_each_data_line(const std::filesystem::path& path,
                        const std::function<void(std::size_t, const std::string&)>& fn);

// First line of the file when it starts with '#', else empty.
std::string read_header_comment(const std::filesystem::path& path);

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
    std::vector<std::size_t> line_numbers;

    // Column index or FormatError.
    std::size_t column(const std::string& name) const;
    std::optional<std::size_t> find_column(const std::string& name) const;
};

// RFC-4180 style quoting; '#' comment lines and blank lines skipped.
CsvTable read_csv(const std::filesystem::path& path);
std::vector<std::string> split_csv_line(std::string_view line);

std::string csv_escape(std::string_view field);
void write_csv_row(std::ostream& out, const std::vector<std::string>& fields);

// Writes to `path.tmp` and renames over `path` once `fn` returns.
void write_file_atomic(const std::filesystem::path& path, const std::function<void(std::ostream&)>& fn);

}  // namespace lexsig
