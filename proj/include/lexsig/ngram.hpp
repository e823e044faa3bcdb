#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <unordered_map>
#include <vector>

#include "lexsig/corpus.hpp"
#include "lexsig/scorer.hpp"

namespace lexsig {

enum class Smoothing {
    add_k,               // (c(h,w) + k) / (c(h) + kV) at the highest order only
    interpolated_add_k,  // add-k whose pseudo-counts follow the next-lower order
    kneser_ney,          // interpolated Kneser-Ney, fixed discount
};

const char* smoothing_name(Smoothing s);
Smoothing parse_smoothing(const std::string& s);

struct NgramConfig {
    std::size_t order = 3;
    Smoothing smoothing = Smoothing::interpolated_add_k;
    double k = 0.1;
    double discount = 0.75;  // Kneser-Ney only
};

// Token ids: 0 is the utterance-start pad, 1 is <unk>, corpus types follow
// in lexicographic order. The predictive vocabulary size V excludes the pad.
class Vocabulary {
public:
    static constexpr std::uint32_t bos_id = 0;
    static constexpr std::uint32_t unk_id = 1;

    explicit Vocabulary(const std::set<Token>& types);

    std::uint32_t id(const Token& tok) const;
    std::size_t predictive_size() const noexcept { return tokens_.size() - 1; }
    const std::vector<Token>& tokens() const noexcept { return tokens_; }

private:
    std::vector<Token> tokens_;
    std::unordered_map<Token, std::uint32_t> ids_;
};

// Packed id sequence, 4 bytes per id.
using NgramKey = std::string;
NgramKey pack_ids(const std::uint32_t* ids, std::size_t n);

using CountTable = std::unordered_map<NgramKey, std::uint64_t>;

// Raw n-gram counts for orders 1..N. tables[n-1] holds n-grams; histories
// are padded with the start id.
struct NgramCounts {
    std::vector<CountTable> ngrams;
    std::vector<CountTable> histories;  // c(h) per order
    std::uint64_t positions = 0;

    bool operator==(const NgramCounts&) const = default;
};

// A frozen n-gram model: one checkpoint.
class NgramModel : public Scorer {
public:
    NgramModel(std::shared_ptr<const Vocabulary> vocab, NgramConfig config, NgramCounts counts, CheckpointId id = {});

    // Trains on every position of the corpus in corpus order.
    static NgramModel train_batch(const Corpus& corpus, const NgramConfig& config);

    double log_prob_word(const Token& word, std::span<const Token> context) const override;
    bool scores_context_prob() const override { return true; }
    // Chained token log-probability of the context from the utterance start.
    double log_prob_context(std::span<const Token> context) const override;
    CheckpointId checkpoint() const override { return id_; }

    // Probability of a token id after an id history (already padded or not).
    double prob(std::span<const std::uint32_t> history, std::uint32_t word) const;

    std::uint64_t count(std::span<const Token> ngram) const;
    const NgramCounts& counts() const noexcept { return counts_; }
    const NgramConfig& config() const noexcept { return config_; }
    const Vocabulary& vocabulary() const noexcept { return *vocab_; }

private:
    double prob_add_k(std::span<const std::uint32_t> history, std::uint32_t word) const;
    double prob_interpolated(std::span<const std::uint32_t> history, std::uint32_t word, std::size_t order) const;
    double prob_kn(std::span<const std::uint32_t> history, std::uint32_t word, std::size_t order) const;
    void build_continuations();

    std::shared_ptr<const Vocabulary> vocab_;
    NgramConfig config_;
    NgramCounts counts_;
    CheckpointId id_;

    // Kneser-Ney statistics for orders 1..N-1 (index n-1).
    std::vector<CountTable> cont_ngrams_;
    std::vector<CountTable> cont_histories_;
    std::vector<CountTable> history_types_;  // N1+(h .) for every order
    std::vector<CountTable> cont_history_types_;
};

// A corpus position: utterance index and token index within it.
struct Position {
    std::size_t utterance = 0;
    std::size_t token = 0;
};

// All token positions in corpus order, then permuted by `seed`.
std::vector<Position> shuffled_positions(const Corpus& corpus, std::uint64_t seed);

// Adds one position's n-grams to the counts.
void add_position(NgramCounts& counts, const Vocabulary& vocab, std::size_t order, const TokenSeq& utt,
                  std::size_t pos);

// Streams the seed-shuffled positions, calling `emit` after each scheduled
// number of consumed positions with a frozen checkpoint.
void train_ngram_streaming(const Corpus& corpus, const NgramConfig& config, const std::vector<std::int64_t>& schedule,
                           std::uint64_t seed, const std::function<void(const NgramModel&)>& emit);

CheckpointSeries train_ngram(const Corpus& corpus, const NgramConfig& config,
                             const std::vector<std::int64_t>& schedule, std::uint64_t seed);

// `count` roughly geometric steps ending at `total`, the first near
// `first_fraction * total`. Strictly increasing.
std::vector<std::int64_t> geometric_schedule(std::int64_t total, std::size_t count, double first_fraction);

}  // namespace lexsig
