#include "lexsig/toy_language.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "lexsig/error.hpp"

namespace lexsig {

ToyLanguage::ToyLanguage(std::vector<Token> alphabet, std::map<TokenSeq, double> strings)
    : alphabet_(std::move(alphabet)), strings_(std::move(strings)) {
    if (alphabet_.empty() || alphabet_.size() > max_alphabet)
        throw Error(ErrorCode::format, "toy alphabet must have 1.." + std::to_string(max_alphabet) + " symbols");
    std::set<Token> symbols(alphabet_.begin(), alphabet_.end());
    if (symbols.size() != alphabet_.size()) throw Error(ErrorCode::format, "duplicate toy alphabet symbol");

    double total = 0.0;
    for (const auto& [s, p] : strings_) {
        if (!(p >= 0.0) || !std::isfinite(p)) throw Error(ErrorCode::format, "toy probabilities must be >= 0");
        if (s.size() > max_string_length)
            throw Error(ErrorCode::format, "toy strings are limited to length " + std::to_string(max_string_length));
        for (const auto& tok : s)
            if (!symbols.count(tok)) throw Error(ErrorCode::format, "symbol '" + tok + "' not in alphabet");
        total += p;
        max_length_ = std::max(max_length_, s.size());
        for (std::size_t k = 0; k <= s.size(); ++k) prefix_mass_[TokenSeq(s.begin(), s.begin() + k)] += p;
        context_normalizer_ += p * static_cast<double>(s.size() + 1);
    }
    if (std::abs(total - 1.0) > 1e-12) throw Error(ErrorCode::format, "toy probabilities must sum to 1");
}

ToyLanguage ToyLanguage::from_json_text(const std::string& text) {
    using nlohmann::json;
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw Error(ErrorCode::format, std::string("toy language: ") + e.what());
    }
    try {
        auto alphabet = j.at("alphabet").get<std::vector<Token>>();
        std::map<TokenSeq, double> strings;
        for (const auto& entry : j.at("strings")) {
            auto toks = entry.at("tokens").get<TokenSeq>();
            if (strings.count(toks)) throw Error(ErrorCode::format, "duplicate toy string");
            strings[toks] = entry.at("prob").get<double>();
        }
        return ToyLanguage(std::move(alphabet), std::move(strings));
    } catch (const json::exception& e) {
        throw Error(ErrorCode::format, std::string("toy language: ") + e.what());
    }
}

ToyLanguage ToyLanguage::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::format, "cannot open " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return from_json_text(ss.str());
}

double ToyLanguage::prefix_prob(std::span<const Token> y) const {
    auto it = prefix_mass_.find(TokenSeq(y.begin(), y.end()));
    return it == prefix_mass_.end() ? 0.0 : it->second;
}

double ToyLanguage::string_prob(std::span<const Token> y) const {
    auto it = strings_.find(TokenSeq(y.begin(), y.end()));
    return it == strings_.end() ? 0.0 : it->second;
}

double ToyLanguage::log_prob_word(std::span<const Token> word, std::span<const Token> context) const {
    const double denom = prefix_prob(context);
    if (denom <= 0.0) throw Error(ErrorCode::zero_prefix, "context has zero prefix probability");
    TokenSeq cw(context.begin(), context.end());
    cw.insert(cw.end(), word.begin(), word.end());
    return std::log(prefix_prob(cw)) - std::log(denom);
}

double ToyLanguage::end_prob(std::span<const Token> context) const {
    const double denom = prefix_prob(context);
    if (denom <= 0.0) throw Error(ErrorCode::zero_prefix, "context has zero prefix probability");
    return string_prob(context) / denom;
}

double ToyLanguage::log_prob_context(std::span<const Token> context) const {
    return std::log(prefix_prob(context)) - std::log(context_normalizer_);
}

std::vector<TokenSeq> ToyLanguage::enumerate_contexts(std::size_t max_len) const {
    std::vector<TokenSeq> out{TokenSeq{}};
    std::size_t level_begin = 0;
    for (std::size_t len = 1; len <= max_len; ++len) {
        const std::size_t level_end = out.size();
        for (std::size_t i = level_begin; i < level_end; ++i) {
            for (const auto& sym : alphabet_) {
                TokenSeq next = out[i];
                next.push_back(sym);
                out.push_back(std::move(next));
            }
        }
        level_begin = level_end;
    }
    return out;
}

std::vector<std::pair<TokenSeq, double>> context_distribution(const ToyLanguage& lang, std::span<const Token> word,
                                                              Polarity polarity, std::size_t max_len) {
    std::vector<std::pair<TokenSeq, double>> out;
    double total = 0.0;
    for (auto& c : lang.enumerate_contexts(max_len)) {
        const double pc = lang.prefix_prob(c);
        double mass = pc;
        if (polarity != Polarity::marginal) {
            TokenSeq cw = c;
            cw.insert(cw.end(), word.begin(), word.end());
            const double pcw = lang.prefix_prob(cw);
            mass = polarity == Polarity::positive ? pcw : std::max(0.0, pc - pcw);
        }
        if (mass > 0.0) {
            total += mass;
            out.emplace_back(std::move(c), mass);
        }
    }
    if (!(total > 0.0)) throw Error(ErrorCode::degenerate_word, "context distribution has zero mass");
    for (auto& entry : out) entry.second /= total;
    return out;
}

double ToyScorer::log_prob_word(const Token& word, std::span<const Token> context) const {
    return lang_->log_prob_word(std::span<const Token>(&word, 1), context);
}

double ToyScorer::log_prob_context(std::span<const Token> context) const { return lang_->log_prob_context(context); }

}  // namespace lexsig
