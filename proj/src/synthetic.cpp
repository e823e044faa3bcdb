#include "lexsig/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <set>

#include "lexsig/error.hpp"
#include "lexsig/io.hpp"

namespace lexsig {

namespace {

double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

// Inverse-CDF draw from a discrete distribution.
std::size_t draw(const std::vector<double>& cdf, std::mt19937_64& rng) {
    const double u = uniform01(rng) * cdf.back();
    return static_cast<std::size_t>(std::upper_bound(cdf.begin(), cdf.end(), u) - cdf.begin());
}

std::string make_word(std::mt19937_64& rng, std::size_t syllables) {
    static const std::string onsets = "bdfgklmnprstvz";
    static const std::string vowels = "aeiou";
    std::string w;
    for (std::size_t i = 0; i < syllables; ++i) {
        w += onsets[uniform_index(rng, onsets.size())];
        w += vowels[uniform_index(rng, vowels.size())];
    }
    if (uniform_index(rng, 3) == 0) w += onsets[uniform_index(rng, onsets.size())];
    return w;
}

double clamp(double x, double lo, double hi) { return std::min(hi, std::max(lo, x)); }

}  // namespace

SyntheticData generate_synthetic(const SyntheticOptions& o) {
    if (o.vocab_size < 2 || o.utterances == 0 || o.min_length == 0 || o.max_length < o.min_length)
        throw Error(ErrorCode::usage, "synthetic options out of range");
    if (o.targets > o.vocab_size) throw Error(ErrorCode::usage, "more targets than vocabulary");
    std::mt19937_64 rng(o.seed);
    SyntheticData data;

    std::set<std::string> seen;
    for (std::size_t r = 0; r < o.vocab_size; ++r) {
        // frequent words tend to be short
        const double lr = std::log10(static_cast<double>(r) + 2.0);
        const auto syl = static_cast<std::size_t>(clamp(std::floor(0.8 * lr + 1.5 * uniform01(rng)), 0, 3)) + 1;
        std::string w;
        do w = make_word(rng, syl);
        while (!seen.insert(w).second);
        SyntheticWord sw;
        sw.word = w;
        sw.rank = r;
        data.lexicon.push_back(sw);
    }

    std::vector<double> cdf(o.vocab_size);
    double acc = 0.0;
    for (std::size_t r = 0; r < o.vocab_size; ++r) cdf[r] = acc += std::pow(static_cast<double>(r + 1), -o.zipf_exponent);

    std::vector<std::vector<std::size_t>> succ(o.vocab_size);
    for (auto& s : succ)
        for (std::size_t j = 0; j < o.successors; ++j) s.push_back(draw(cdf, rng));

    auto generate = [&](std::size_t n, std::vector<TokenSeq>& out) {
        out.reserve(n);
        for (std::size_t u = 0; u < n; ++u) {
            const std::size_t len = o.min_length + uniform_index(rng, o.max_length - o.min_length + 1);
            TokenSeq utt;
            std::size_t prev = draw(cdf, rng);
            utt.push_back(data.lexicon[prev].word);
            while (utt.size() < len) {
                const bool follow = !succ[prev].empty() && uniform01(rng) < o.successor_prob;
                prev = follow ? succ[prev][uniform_index(rng, succ[prev].size())] : draw(cdf, rng);
                utt.push_back(data.lexicon[prev].word);
            }
            out.push_back(std::move(utt));
        }
    };
    generate(o.utterances, data.utterances);
    generate(o.test_utterances, data.test_utterances);

    // Child norms: the most frequent words are function words, the rest mixed.
    // Box-Muller on raw draws keeps the fixture identical across standard libraries
    auto noise = [](std::mt19937_64& g) {
        const double u1 = 1.0 - uniform01(g), u2 = uniform01(g);
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
    };
    for (auto& w : data.lexicon) {
        const double frac = static_cast<double>(w.rank) / static_cast<double>(o.vocab_size);
        if (w.rank < o.vocab_size / 20) {
            w.category = LexicalCategory::function_word;
        } else {
            const auto pick = uniform_index(rng, 20);
            w.category = pick < 11 ? LexicalCategory::noun : pick < 19 ? LexicalCategory::predicate
                                                                       : LexicalCategory::other;
        }
        const double base = w.category == LexicalCategory::noun        ? 4.2
                            : w.category == LexicalCategory::predicate ? 3.0
                                                                       : 1.9;
        w.concreteness = clamp(base + 0.5 * noise(rng), 1.0, 5.0);
        w.child_aoa = clamp(17.0 + 14.0 * std::sqrt(frac) - 0.8 * (w.concreteness - 3.0) + 1.5 * noise(rng), 12.0,
                            34.0);
    }

    // Targets spread evenly over the upper ranks; rarer ones may fail the type filter.
    const std::size_t span = std::min(o.vocab_size, o.targets * 2);
    for (std::size_t i = 0; i < o.targets; ++i) data.targets.push_back(data.lexicon[i * span / o.targets].word);
    for (std::size_t i = 0; i < o.excluded && i < data.targets.size(); ++i)
        data.exclusions.push_back(data.targets[(i * 7 + 3) % data.targets.size()]);
    return data;
}

void write_synthetic(const SyntheticData& data, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    write_file_atomic(dir / "train.txt", [&](std::ostream& out) {
        for (const auto& u : data.utterances) out << join_tokens(u) << '\n';
    });
    if (!data.test_utterances.empty())
        write_file_atomic(dir / "test.txt", [&](std::ostream& out) {
            for (const auto& u : data.test_utterances) out << join_tokens(u) << '\n';
        });
    write_file_atomic(dir / "words.txt", [&](std::ostream& out) {
        for (const auto& w : data.targets) out << w << '\n';
    });
    write_file_atomic(dir / "exclusions.txt", [&](std::ostream& out) {
        out << "# misannotated entries\n";
        for (const auto& w : data.exclusions) out << w << '\n';
    });
    std::set<std::string> targets(data.targets.begin(), data.targets.end());
    write_file_atomic(dir / "wordbank.csv", [&](std::ostream& out) {
        write_csv_row(out, {"word", "category", "month", "proportion"});
        for (const auto& w : data.lexicon) {
            if (!targets.count(w.word)) continue;
            for (int m = 12; m <= 36; m += 2) {
                // logistic production curve centred on the child AoA
                const double p = 1.0 / (1.0 + std::exp(-(m - w.child_aoa) / 1.8));
                const double rounded = std::round(p * 1000.0) / 1000.0;
                write_csv_row(out, {w.word, category_name(w.category), std::to_string(m), format_double(rounded)});
            }
        }
    });
    write_file_atomic(dir / "concreteness.csv", [&](std::ostream& out) {
        write_csv_row(out, {"word", "concreteness"});
        for (const auto& w : data.lexicon)
            if (targets.count(w.word)) write_csv_row(out, {w.word, format_double(std::round(w.concreteness * 100) / 100)});
    });
    write_file_atomic(dir / "config.toml", [&](std::ostream& out) {
        out << "# Synthetic end-to-end run. Paths are relative to this file.\n\n"
               "[corpus]\n"
               "train = \"train.txt\"\n"
               "test = \"test.txt\"\n"
               "max_context_len = 64\n\n"
               "[words]\n"
               "targets = \"words.txt\"\n\n"
               "[sample]\n"
               "positive = 100\n"
               "negative = 100\n"
               "marginal = 100\n"
               "seed = 0\n\n"
               "[backend]\n"
               "kind = \"ngram\"\n"
               "# the generator is first-order Markov\n"
               "order = 2\n"
               "smoothing = \"interpolated_add_k\"\n"
               "k = 0.1\n"
               "reference_order = 4\n"
               "reference_k = 0.01\n\n"
               "[checkpoints]\n"
               "count = 16\n"
               "first_fraction = 0.002\n\n"
               "[run]\n"
               "seeds = [1, 2, 3]\n\n"
               "[aoa]\n"
               "window = 3\n"
               "epsilon = 0.07\n"
               "epsilons = [0.03, 0.05, 0.07, 0.10, 0.15]\n\n"
               "[analysis]\n"
               "wordbank = \"wordbank.csv\"\n"
               "exclusions = \"exclusions.txt\"\n"
               "concreteness = \"concreteness.csv\"\n"
               "min_words = 30\n";
    });
}

}  // namespace lexsig
