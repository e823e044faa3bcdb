#pragma once

#include <filesystem>
#include <map>
#include <span>
#include <utility>
#include <vector>

#include "lexsig/corpus.hpp"
#include "lexsig/scorer.hpp"

namespace lexsig {

// A language given by an explicit probability table over a bounded set of
// strings. Small enough that every quantity over contexts can be computed
// by enumeration.
class ToyLanguage {
public:
    static constexpr std::size_t max_alphabet = 6;
    static constexpr std::size_t max_string_length = 6;

    ToyLanguage(std::vector<Token> alphabet, std::map<TokenSeq, double> strings);

    // {"alphabet": [...], "strings": [{"tokens": [...], "prob": p}, ...]}
    static ToyLanguage from_json_text(const std::string& text);
    static ToyLanguage load(const std::filesystem::path& path);

    const std::vector<Token>& alphabet() const noexcept { return alphabet_; }
    const std::map<TokenSeq, double>& strings() const noexcept { return strings_; }
    std::size_t max_length() const noexcept { return max_length_; }

    // Total mass of strings having `y` as a prefix.
    double prefix_prob(std::span<const Token> y) const;
    // p(y) itself: mass of the string equal to y.
    double string_prob(std::span<const Token> y) const;

    // log(prefix(c w) / prefix(c)); ZeroPrefix when prefix(c) == 0.
    double log_prob_word(std::span<const Token> word, std::span<const Token> context) const;
    // Probability that the string ends right after c, given prefix c.
    double end_prob(std::span<const Token> context) const;

    // Sum of prefix(c) over all contexts; equals expected length + 1.
    double context_normalizer() const noexcept { return context_normalizer_; }
    // log(prefix(c) / context_normalizer()).
    double log_prob_context(std::span<const Token> context) const;

    // Every sequence over the alphabet of length 0..max_len, shortest first.
    std::vector<TokenSeq> enumerate_contexts(std::size_t max_len) const;
    std::vector<TokenSeq> enumerate_contexts() const { return enumerate_contexts(max_length_); }

private:
    std::vector<Token> alphabet_;
    std::map<TokenSeq, double> strings_;
    std::map<TokenSeq, double> prefix_mass_;
    std::size_t max_length_ = 0;
    double context_normalizer_ = 0.0;
};

// Exact context distributions by enumeration over contexts of length
// <= max_len:
//   positive  p(c | w)  proportional to prefix(c w)
//   negative  p(c | -w) proportional to prefix(c) - prefix(c w)
//   marginal  p(c)      proportional to prefix(c)
// Only contexts with nonzero mass are returned. DegenerateWord when the
// normalizer is zero.
std::vector<std::pair<TokenSeq, double>> context_distribution(const ToyLanguage& lang, std::span<const Token> word,
                                                              Polarity polarity, std::size_t max_len);

// Scorer view of a toy language for single-symbol words.
class ToyScorer : public Scorer {
public:
    explicit ToyScorer(std::shared_ptr<const ToyLanguage> lang, CheckpointId id = {})
        : lang_(std::move(lang)), id_(id) {}

    double log_prob_word(const Token& word, std::span<const Token> context) const override;
    bool scores_context_prob() const override { return true; }
    double log_prob_context(std::span<const Token> context) const override;
    CheckpointId checkpoint() const override { return id_; }

private:
    std::shared_ptr<const ToyLanguage> lang_;
    CheckpointId id_;
};

}  // namespace lexsig
