#include "lexsig/corpus.hpp"

#include <cctype>
#include <cmath>
#include <fstream>

#include "json.hpp"

#include "lexsig/error.hpp"
#include "lexsig/io.hpp"

namespace lexsig {

using nlohmann::json;

Corpus::Corpus(std::vector<TokenSeq> utterances, std::string source_id)
    : utterances_(std::move(utterances)), source_id_(std::move(source_id)) {
    for (std::size_t i = 0; i < utterances_.size(); ++i) {
        if (utterances_[i].empty())
            throw Error(ErrorCode::format, "utterance " + std::to_string(i) + " is empty");
        for (const auto& tok : utterances_[i]) inventory_.insert(tok);
        total_tokens_ += utterances_[i].size();
    }
}

Corpus Corpus::read_text(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::format, "cannot open corpus " + path.string());
    std::vector<TokenSeq> utts;
    std::string line;
    while (std::getline(in, line)) {
        auto toks = split_tokens(line);
        if (!toks.empty()) utts.push_back(std::move(toks));
    }
    return Corpus(std::move(utts), path.string());
}

Corpus Corpus::read_jsonl(const std::filesystem::path& path) {
    std::vector<TokenSeq> utts;
    const std::string src = path.string();
    for_each_data_line(path, [&](std::size_t lineno, const std::string& line) {
        json j;
        try {
            j = json::parse(line);
        } catch (const json::exception& e) {
            throw FormatError(src, lineno, e.what());
        }
        if (!j.is_object() || !j.contains("tokens") || !j["tokens"].is_array())
            throw FormatError(src, lineno, "expected object with a `tokens` array");
        TokenSeq toks;
        for (const auto& t : j["tokens"]) {
            if (!t.is_string()) throw FormatError(src, lineno, "non-string token");
            toks.push_back(t.get<std::string>());
        }
        if (!toks.empty()) utts.push_back(std::move(toks));
    });
    return Corpus(std::move(utts), src);
}

Corpus Corpus::load(const std::filesystem::path& path) {
    if (path.extension() == ".jsonl") return read_jsonl(path);
    return read_text(path);
}

const char* polarity_name(Polarity p) {
    switch (p) {
    case Polarity::positive: return "positive";
    case Polarity::negative: return "negative";
    case Polarity::marginal: return "marginal";
    }
    return "?";
}

Polarity parse_polarity(const std::string& s) {
    if (s == "positive") return Polarity::positive;
    if (s == "negative") return Polarity::negative;
    if (s == "marginal") return Polarity::marginal;
    throw Error(ErrorCode::format, "unknown polarity '" + s + "'");
}

FrequencyTable count_frequencies(const Corpus& corpus) {
    FrequencyTable counts;
    for (const auto& utt : corpus.utterances())
        for (const auto& tok : utt) ++counts[tok];
    return counts;
}

TokenSeq context_before(const TokenSeq& utt, std::size_t pos, std::size_t max_context_len) {
    std::size_t begin = pos > max_context_len ? pos - max_context_len : 0;
    return TokenSeq(utt.begin() + static_cast<std::ptrdiff_t>(begin), utt.begin() + static_cast<std::ptrdiff_t>(pos));
}

bool blocks_negative(const Token& follower, const Token& word) { return starts_with(follower, word); }

std::map<TokenSeq, std::size_t> positive_context_types(const Corpus& corpus, const Token& word,
                                                       std::size_t max_context_len) {
    std::map<TokenSeq, std::size_t> types;
    for (const auto& utt : corpus.utterances())
        for (std::size_t i = 0; i < utt.size(); ++i)
            if (utt[i] == word) ++types[context_before(utt, i, max_context_len)];
    return types;
}

std::map<TokenSeq, std::size_t> negative_context_types(const Corpus& corpus, const Token& word,
                                                       std::size_t max_context_len) {
    std::map<TokenSeq, std::size_t> types;
    for (const auto& utt : corpus.utterances())
        for (std::size_t i = 0; i < utt.size(); ++i)
            if (!blocks_negative(utt[i], word)) ++types[context_before(utt, i, max_context_len)];
    return types;
}

std::map<TokenSeq, std::size_t> marginal_context_types(const Corpus& corpus, std::size_t max_context_len) {
    std::map<TokenSeq, std::size_t> types;
    for (const auto& utt : corpus.utterances())
        for (std::size_t i = 0; i <= utt.size(); ++i) ++types[context_before(utt, i, max_context_len)];
    return types;
}

namespace {

ContextSample draw(std::map<TokenSeq, std::size_t> types, std::string word, Polarity polarity, std::size_t m,
                   std::uint64_t seed) {
    if (m < 1) throw Error(ErrorCode::usage, "sample size must be >= 1");
    std::vector<ContextEntry> all;
    all.reserve(types.size());
    for (auto& [ctx, count] : types) all.push_back({ctx, count});

    ContextSample sample;
    sample.word = std::move(word);
    sample.polarity = polarity;
    sample.capacity = m;
    sample.insufficient_types = all.size() < m;
    for (std::size_t idx : sample_without_replacement(all.size(), m, seed))
        sample.contexts.push_back(std::move(all[idx]));
    return sample;
}

void check_lengths(std::size_t max_context_len) {
    if (max_context_len < 1) throw Error(ErrorCode::usage, "max_context_len must be >= 1");
}

}  // namespace

ContextSample sample_positive_contexts(const Corpus& corpus, const Token& word, std::size_t m,
                                       std::size_t max_context_len, std::uint64_t seed) {
    check_lengths(max_context_len);
    auto types = positive_context_types(corpus, word, max_context_len);
    if (types.empty()) throw Error(ErrorCode::word_absent, "'" + word + "' does not occur in the corpus");
    return draw(std::move(types), word, Polarity::positive, m, seed);
}

ContextSample sample_negative_contexts(const Corpus& corpus, const Token& word, std::size_t m,
                                       std::size_t max_context_len, std::uint64_t seed) {
    check_lengths(max_context_len);
    return draw(negative_context_types(corpus, word, max_context_len), word, Polarity::negative, m, seed);
}

ContextSample sample_marginal_contexts(const Corpus& corpus, std::size_t m, std::size_t max_context_len,
                                       std::uint64_t seed) {
    check_lengths(max_context_len);
    return draw(marginal_context_types(corpus, max_context_len), {}, Polarity::marginal, m, seed);
}

double compute_mlu(const Corpus& corpus, const Token& word) {
    std::size_t n = 0;
    double total = 0.0;
    for (const auto& utt : corpus.utterances()) {
        for (const auto& tok : utt) {
            if (tok == word) {
                ++n;
                total += static_cast<double>(utt.size());
                break;
            }
        }
    }
    if (n == 0) throw Error(ErrorCode::word_absent, "'" + word + "' does not occur in the corpus");
    return total / static_cast<double>(n);
}

VocabularyFilter filter_vocabulary(const std::vector<Token>& words, const Corpus& corpus, std::size_t min_types,
                                   std::size_t max_context_len) {
    if (min_types < 1) throw Error(ErrorCode::usage, "min_types must be >= 1");
    VocabularyFilter out;
    for (const auto& w : words) {
        std::size_t n = positive_context_types(corpus, w, max_context_len).size();
        if (n >= min_types)
            out.retained.push_back(w);
        else
            out.excluded.emplace_back(w, n);
    }
    return out;
}

const char* category_name(LexicalCategory c) {
    switch (c) {
    case LexicalCategory::noun: return "noun";
    case LexicalCategory::predicate: return "predicate";
    case LexicalCategory::function_word: return "function_word";
    case LexicalCategory::other: return "other";
    }
    return "?";
}

std::optional<LexicalCategory> parse_category(const std::string& raw) {
    std::string s;
    for (char c : raw) s += (c == ' ' || c == '-') ? '_' : static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (s == "noun" || s == "nouns") return LexicalCategory::noun;
    if (s == "predicate" || s == "predicates" || s == "adjective" || s == "adjectives" || s == "verb" ||
        s == "verbs")
        return LexicalCategory::predicate;
    if (s == "function_word" || s == "function_words") return LexicalCategory::function_word;
    if (s == "other") return LexicalCategory::other;
    return std::nullopt;
}

std::size_t utf8_length(const std::string& s) {
    std::size_t n = 0;
    for (unsigned char c : s)
        if ((c & 0xC0) != 0x80) ++n;
    return n;
}

WordFeatures corpus_features(const Corpus& corpus, const FrequencyTable& freqs, const Token& word) {
    WordFeatures f;
    f.word = word;
    auto it = freqs.find(word);
    f.count = it == freqs.end() ? 0 : it->second;
    f.log_frequency = f.count > 0 ? std::log(static_cast<double>(f.count)) : -INFINITY;
    f.n_chars = utf8_length(word);
    if (f.count > 0) f.mlu = compute_mlu(corpus, word);
    return f;
}

void write_context_sample(std::ostream& out, const ContextSample& sample) {
    for (const auto& entry : sample.contexts) {
        json j;
        j["word"] = sample.word;
        j["polarity"] = polarity_name(sample.polarity);
        j["context"] = entry.context;
        j["count"] = entry.count;
        out << j.dump() << '\n';
    }
}

std::vector<ContextSample> read_context_samples(const std::filesystem::path& path) {
    std::vector<ContextSample> samples;
    std::map<std::pair<std::string, Polarity>, std::size_t> index;
    const std::string src = path.string();
    for_each_data_line(path, [&](std::size_t lineno, const std::string& line) {
        try {
            auto j = json::parse(line);
            auto word = j.at("word").get<std::string>();
            auto pol = parse_polarity(j.at("polarity").get<std::string>());
            ContextEntry entry{j.at("context").get<TokenSeq>(), j.at("count").get<std::size_t>()};
            if (entry.count < 1) throw FormatError(src, lineno, "count must be >= 1");
            auto key = std::make_pair(word, pol);
            auto it = index.find(key);
            if (it == index.end()) {
                it = index.emplace(key, samples.size()).first;
                ContextSample s;
                s.word = word;
                s.polarity = pol;
                samples.push_back(std::move(s));
            }
            auto& s = samples[it->second];
            s.contexts.push_back(std::move(entry));
            s.capacity = s.contexts.size();
        } catch (const FormatError&) {
            throw;
        } catch (const std::exception& e) {
            throw FormatError(src, lineno, e.what());
        }
    });
    return samples;
}

}  // namespace lexsig
