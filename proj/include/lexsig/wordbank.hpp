#pragma once

#include <filesystem>
#include <map>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "lexsig/corpus.hpp"

namespace lexsig {

struct MonthProportion {
    int month = 0;
    double proportion = 0.0;
};

struct WordbankEntry {
    std::string category;  // as written in the source file
    LexicalCategory lexical_category = LexicalCategory::other;
    std::vector<MonthProportion> points;  // months strictly increasing
};

struct ProportionTable {
    std::map<std::string, WordbankEntry> words;

    bool contains(const std::string& word) const { return words.count(word) > 0; }
    std::map<std::string, LexicalCategory> categories() const;
};

// Month at which `word` is first produced by at least `threshold` of children.
// With interpolation the crossing is placed linearly between the straddling months.
double child_aoa(const ProportionTable& table, const std::string& word, double threshold = 0.5,
                 bool interpolate = true);
double child_aoa(const std::vector<MonthProportion>& points, double threshold = 0.5, bool interpolate = true);

struct WordbankLoad {
    ProportionTable table;
    std::vector<std::string> excluded;  // listed in the exclusion file and present in the CSV
};

std::vector<std::string> read_word_list(const std::filesystem::path& path);

ProportionTable parse_wordbank(const std::filesystem::path& csv);
WordbankLoad load_wordbank(const std::filesystem::path& csv, const std::filesystem::path& exclusions = {});
void write_wordbank(std::ostream& out, const ProportionTable& table);

// Child AoA for every word that reaches the threshold; the rest are returned in `never`.
std::map<std::string, double> child_aoa_all(const ProportionTable& table, double threshold, bool interpolate,
                                            std::vector<std::string>* never = nullptr);

}  // namespace lexsig
