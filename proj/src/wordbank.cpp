#include "lexsig/wordbank.hpp"

#include <cmath>
#include <fstream>
#include <set>

#include "lexsig/error.hpp"
#include "lexsig/io.hpp"

namespace lexsig {

std::map<std::string, LexicalCategory> ProportionTable::categories() const {
    std::map<std::string, LexicalCategory> out;
    for (const auto& [w, e] : words) out.emplace(w, e.lexical_category);
    return out;
}

double child_aoa(const std::vector<MonthProportion>& points, double threshold, bool interpolate) {
    for (std::size_t i = 0; i < points.size(); ++i) {
        if (points[i].proportion < threshold) continue;
        if (!interpolate || i == 0 || points[i].proportion == threshold) return points[i].month;
        const auto& a = points[i - 1];
        const auto& b = points[i];
        const double t = (threshold - a.proportion) / (b.proportion - a.proportion);
        return a.month + t * (b.month - a.month);
    }
    throw Error(ErrorCode::never_acquired, "proportion never reaches " + format_double(threshold));
}

double child_aoa(const ProportionTable& table, const std::string& word, double threshold, bool interpolate) {
    auto it = table.words.find(word);
    if (it == table.words.end()) throw Error(ErrorCode::word_absent, "'" + word + "' not in wordbank table");
    try {
        return child_aoa(it->second.points, threshold, interpolate);
    } catch (const Error& e) {
        throw Error(e.code(), "'" + word + "': " + e.what());
    }
}

std::map<std::string, double> child_aoa_all(const ProportionTable& table, double threshold, bool interpolate,
                                            std::vector<std::string>* never) {
    std::map<std::string, double> out;
    for (const auto& [w, e] : table.words) {
        try {
            out.emplace(w, child_aoa(e.points, threshold, interpolate));
        } catch (const Error& err) {
            if (err.code() != ErrorCode::never_acquired) throw;
            if (never) never->push_back(w);
        }
    }
    return out;
}

std::vector<std::string> read_word_list(const std::filesystem::path& path) {
    std::vector<std::string> out;
    for_each_data_line(path, [&](std::size_t, const std::string& line) {
        auto b = line.find_first_not_of(" \t\r");
        auto e = line.find_last_not_of(" \t\r");
        if (b != std::string::npos) out.push_back(line.substr(b, e - b + 1));
    });
    return out;
}

ProportionTable parse_wordbank(const std::filesystem::path& csv) {
    const auto src = csv.string();
    auto t = read_csv(csv);
    const auto cw = t.column("word"), cc = t.column("category"), cm = t.column("month"), cp = t.column("proportion");
    ProportionTable table;
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        const auto& row = t.rows[r];
        const auto line = t.line_numbers[r];
        if (row.size() != t.header.size()) throw FormatError(src, line, "expected " + std::to_string(t.header.size()) + " fields");
        const auto& word = row[cw];
        if (word.empty()) throw FormatError(src, line, "empty word");
        const int month = static_cast<int>(parse_int(row[cm], src, line));
        const double prop = parse_double(row[cp], src, line);
        if (!(prop >= 0.0 && prop <= 1.0)) throw FormatError(src, line, "proportion outside [0,1]");
        auto [it, fresh] = table.words.try_emplace(word);
        auto& e = it->second;
        if (fresh) {
            e.category = row[cc];
            e.lexical_category = parse_category(row[cc]).value_or(LexicalCategory::other);
        } else if (e.category != row[cc]) {
            throw FormatError(src, line, "category for '" + word + "' changes from '" + e.category + "'");
        }
        if (!e.points.empty() && e.points.back().month >= month)
            throw FormatError(src, line, "months for '" + word + "' not strictly increasing");
        e.points.push_back({month, prop});
    }
    return table;
}

WordbankLoad load_wordbank(const std::filesystem::path& csv, const std::filesystem::path& exclusions) {
    WordbankLoad out;
    out.table = parse_wordbank(csv);
    if (exclusions.empty()) return out;
    for (const auto& w : read_word_list(exclusions)) {
        if (out.table.words.erase(w)) out.excluded.push_back(w);
    }
    return out;
}

void write_wordbank(std::ostream& out, const ProportionTable& table) {
    write_csv_row(out, {"word", "category", "month", "proportion"});
    for (const auto& [w, e] : table.words)
        for (const auto& p : e.points)
            write_csv_row(out, {w, e.category, std::to_string(p.month), format_double(p.proportion)});
}

}  // namespace lexsig
