#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "lexsig/corpus.hpp"

namespace lexsig {

struct SyntheticOptions {
    std::size_t vocab_size = 300;
    std::size_t utterances = 40000;       // training corpus
    std::size_t test_utterances = 25000;  // held-out corpus the contexts are sampled from
    std::size_t min_length = 3;
    std::size_t max_length = 10;
    double zipf_exponent = 1.0;
    double successor_prob = 0.5;  // chance the next token follows the previous token's preferences
    std::size_t successors = 4;
    std::size_t targets = 100;    // target words, spread over the frequency ranks
    std::size_t excluded = 3;     // targets listed as misannotated
    std::uint64_t seed = 7;
};

struct SyntheticWord {
    std::string word;
    std::size_t rank = 0;  // 0 = most frequent
    LexicalCategory category = LexicalCategory::other;
    double concreteness = 0.0;
    double child_aoa = 0.0;  // months
};

struct SyntheticData {
    std::vector<TokenSeq> utterances;
    std::vector<TokenSeq> test_utterances;
    std::vector<SyntheticWord> lexicon;  // by rank
    std::vector<std::string> targets;
    std::vector<std::string> exclusions;
};

// Zipfian corpus with first-order successor preferences, plus a matching
// child-norm fixture whose AoA rises with frequency rank.
SyntheticData generate_synthetic(const SyntheticOptions& options);

// Writes train.txt, test.txt, words.txt, wordbank.csv, exclusions.txt, concreteness.csv
// and config.toml into `dir`.
void write_synthetic(const SyntheticData& data, const std::filesystem::path& dir);

}  // namespace lexsig
