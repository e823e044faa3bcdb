#pragma once

#include <filesystem>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <optional>
#include <random>
#include <sstream>
#include <string>

#include "lexsig/error.hpp"
#include "lexsig/signatures.hpp"
#include "lexsig/toy_language.hpp"

namespace testing {

// Error code thrown by `fn`, or nullopt when it returns normally.
template <class F>
std::optional<lexsig::ErrorCode> error_of(F&& fn) {
    try {
        fn();
    } catch (const lexsig::Error& e) {
        return e.code();
    }
    return std::nullopt;
}

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        std::random_device rd;
        path_ = std::filesystem::temp_directory_path() / ("lexsig_" + tag + "_" + std::to_string(rd()));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

inline void write(const std::filesystem::path& p, const std::string& text) {
    std::filesystem::create_directories(p.parent_path());
    std::ofstream(p) << text;
}

inline std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// Hand-specified toy languages over small alphabets, strings of length <= 4.
inline lexsig::ToyLanguage toy_a() {
    return lexsig::ToyLanguage({"a", "b", "c"}, {{{"a", "b"}, 0.3},
                                                 {{"a", "c"}, 0.2},
                                                 {{"b"}, 0.1},
                                                 {{"b", "a", "c"}, 0.25},
                                                 {{"c", "a", "b", "a"}, 0.15}});
}

inline lexsig::ToyLanguage toy_b() {
    return lexsig::ToyLanguage({"a", "b", "c", "d"}, {{{"a"}, 0.05},
                                                      {{"a", "a"}, 0.1},
                                                      {{"a", "b", "c"}, 0.2},
                                                      {{"b", "d"}, 0.15},
                                                      {{"c", "b", "a"}, 0.1},
                                                      {{"d", "a", "b", "c"}, 0.25},
                                                      {{"d", "d"}, 0.15}});
}

inline lexsig::ToyLanguage toy_c() {
    return lexsig::ToyLanguage({"x", "y"}, {{{}, 0.1},
                                            {{"x"}, 0.1},
                                            {{"x", "y"}, 0.2},
                                            {{"y", "x"}, 0.2},
                                            {{"x", "x", "y"}, 0.15},
                                            {{"y", "y", "x", "y"}, 0.25}});
}

// A model language: every string over the alphabet up to `len`, weights
// drawn from `seed`.
inline lexsig::ToyLanguage random_toy(const std::vector<std::string>& alphabet, std::size_t len, unsigned seed) {
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> u(0.05, 1.0);
    std::map<lexsig::TokenSeq, double> strings;
    std::vector<lexsig::TokenSeq> frontier{{}};
    double total = 0.0;
    for (std::size_t l = 0; l <= len; ++l) {
        std::vector<lexsig::TokenSeq> next;
        for (const auto& s : frontier) {
            const double w = u(rng);
            strings[s] = w;
            total += w;
            for (const auto& a : alphabet) {
                auto t = s;
                t.push_back(a);
                next.push_back(t);
            }
        }
        frontier = std::move(next);
    }
    for (auto& [s, w] : strings) w /= total;
    // renormalize exactly through the largest entry
    double sum = 0.0;
    for (auto& [s, w] : strings) sum += w;
    strings.begin()->second += 1.0 - sum;
    return lexsig::ToyLanguage(alphabet, strings);
}

// Every context of the kind's weighting distribution, scored exactly. True
// and reference kinds carry the p-derived weight; intrinsic kinds get every
// context with q(c) > 0 at unit weight and derive their own.
inline std::vector<lexsig::ContextScore> exhaustive_scores(const lexsig::ToyLanguage& p, const lexsig::ToyLanguage& q,
                                                          const lexsig::ToyLanguage& r, lexsig::SignatureKind kind,
                                                          const lexsig::TokenSeq& word) {
    using namespace lexsig;
    const std::size_t max_len = std::max({p.max_length(), q.max_length(), r.max_length()});
    auto log_word = [&](const ToyLanguage& lang, const TokenSeq& c) {
        return lang.prefix_prob(c) > 0.0 ? lang.log_prob_word(word, c) : -INFINITY;
    };
    std::vector<ContextScore> out;
    if (kind.family == Family::intrinsic) {
        for (const auto& c : q.enumerate_contexts(max_len)) {
            if (q.prefix_prob(c) <= 0.0) continue;
            out.push_back({log_word(q, c), q.log_prob_context(c), std::nullopt, 1.0});
        }
        return out;
    }
    for (const auto& [c, w] : context_distribution(p, word, sample_polarity(kind.polarity), max_len))
        out.push_back({log_word(q, c), std::nullopt, log_word(r, c), w});
    return out;
}

}  // namespace testing
