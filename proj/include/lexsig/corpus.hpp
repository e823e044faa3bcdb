#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "lexsig/tokens.hpp"

namespace lexsig {

// A tokenized corpus: non-empty utterances, contexts never cross them.
class Corpus {
public:
    Corpus() = default;
    explicit Corpus(std::vector<TokenSeq> utterances, std::string source_id = {});

    // Plain text, one whitespace-tokenized utterance per line. Blank lines
    // are skipped.
    static Corpus read_text(const std::filesystem::path& path);
    // JSONL with a `tokens` array per line.
    static Corpus read_jsonl(const std::filesystem::path& path);
    // Dispatches on the `.jsonl` extension.
    static Corpus load(const std::filesystem::path& path);

    const std::vector<TokenSeq>& utterances() const noexcept { return utterances_; }
    const std::set<Token>& inventory() const noexcept { return inventory_; }
    const std::string& source_id() const noexcept { return source_id_; }
    std::size_t total_tokens() const noexcept { return total_tokens_; }
    bool empty() const noexcept { return utterances_.empty(); }

private:
    std::vector<TokenSeq> utterances_;
    std::set<Token> inventory_;
    std::string source_id_;
    std::size_t total_tokens_ = 0;
};

enum class Polarity { positive, negative, marginal };

const char* polarity_name(Polarity p);
Polarity parse_polarity(const std::string& s);

struct ContextEntry {
    TokenSeq context;
    std::size_t count = 1;

    bool operator==(const ContextEntry&) const = default;
};

struct ContextSample {
    std::string word;  // empty for marginal samples
    Polarity polarity = Polarity::positive;
    std::vector<ContextEntry> contexts;
    std::size_t capacity = 0;
    bool insufficient_types = false;  // fewer than `capacity` distinct types existed

    bool operator==(const ContextSample&) const = default;
};

using FrequencyTable = std::map<Token, std::size_t>;

FrequencyTable count_frequencies(const Corpus& corpus);

// Truncated context preceding position `pos` of `utt`.
TokenSeq context_before(const TokenSeq& utt, std::size_t pos, std::size_t max_context_len);

// Distinct context types with their corpus multiplicity.
std::map<TokenSeq, std::size_t> positive_context_types(const Corpus& corpus, const Token& word,
                                                       std::size_t max_context_len);
std::map<TokenSeq, std::size_t> negative_context_types(const Corpus& corpus, const Token& word,
                                                       std::size_t max_context_len);
std::map<TokenSeq, std::size_t> marginal_context_types(const Corpus& corpus, std::size_t max_context_len);

// True when `follower` rules a position out of the negative set for `word`.
bool blocks_negative(const Token& follower, const Token& word);

ContextSample sample_positive_contexts(const Corpus& corpus, const Token& word, std::size_t m,
                                       std::size_t max_context_len, std::uint64_t seed);
ContextSample sample_negative_contexts(const Corpus& corpus, const Token& word, std::size_t m,
                                       std::size_t max_context_len, std::uint64_t seed);
ContextSample sample_marginal_contexts(const Corpus& corpus, std::size_t m, std::size_t max_context_len,
                                       std::uint64_t seed);

double compute_mlu(const Corpus& corpus, const Token& word);

struct VocabularyFilter {
    std::vector<Token> retained;
    std::vector<std::pair<Token, std::size_t>> excluded;  // word, positive type count
};

VocabularyFilter filter_vocabulary(const std::vector<Token>& words, const Corpus& corpus, std::size_t min_types,
                                   std::size_t max_context_len);

enum class LexicalCategory { noun, predicate, function_word, other };

const char* category_name(LexicalCategory c);
// Accepts noun(s), predicate(s), adjective(s), verb(s), function_word(s),
// "function words", other.
std::optional<LexicalCategory> parse_category(const std::string& s);

struct WordFeatures {
    Token word;
    std::size_t count = 0;
    double log_frequency = 0.0;  // -inf when count == 0
    std::size_t n_chars = 0;
    std::optional<double> concreteness;
    std::optional<double> mlu;
    LexicalCategory lexical_category = LexicalCategory::other;
};

// Number of Unicode code points in a UTF-8 string.
std::size_t utf8_length(const std::string& s);

// Corpus-derived predictors. Concreteness and category are filled by the caller.
WordFeatures corpus_features(const Corpus& corpus, const FrequencyTable& freqs, const Token& word);

// JSONL: {"word","polarity","context","count"} per line.
void write_context_sample(std::ostream& out, const ContextSample& sample);
std::vector<ContextSample> read_context_samples(const std::filesystem::path& path);

}  // namespace lexsig
