#include "lexsig/ngram.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

#include "lexsig/error.hpp"

namespace lexsig {

const char* smoothing_name(Smoothing s) {
    switch (s) {
    case Smoothing::add_k: return "add_k";
    case Smoothing::interpolated_add_k: return "interpolated_add_k";
    case Smoothing::kneser_ney: return "kneser_ney";
    }
    return "?";
}

Smoothing parse_smoothing(const std::string& s) {
    if (s == "add_k") return Smoothing::add_k;
    if (s == "interpolated_add_k" || s == "interpolated") return Smoothing::interpolated_add_k;
    if (s == "kneser_ney" || s == "interpolated_kn" || s == "kn") return Smoothing::kneser_ney;
    throw Error(ErrorCode::usage, "unknown smoothing '" + s + "'");
}

Vocabulary::Vocabulary(const std::set<Token>& types) {
    tokens_ = {"<s>", "<unk>"};
    for (const auto& t : types) tokens_.push_back(t);
    for (std::uint32_t i = 0; i < tokens_.size(); ++i) ids_.emplace(tokens_[i], i);
}

std::uint32_t Vocabulary::id(const Token& tok) const {
    auto it = ids_.find(tok);
    if (it == ids_.end() || it->second == bos_id) return unk_id;
    return it->second;
}

NgramKey pack_ids(const std::uint32_t* ids, std::size_t n) {
    NgramKey key(n * sizeof(std::uint32_t), '\0');
    if (n) std::memcpy(key.data(), ids, n * sizeof(std::uint32_t));
    return key;
}

namespace {

std::uint64_t lookup(const CountTable& table, const NgramKey& key) {
    auto it = table.find(key);
    return it == table.end() ? 0 : it->second;
}

// Last `n` ids of the history, left-padded with the start id.
std::vector<std::uint32_t> tail(std::span<const std::uint32_t> history, std::size_t n) {
    std::vector<std::uint32_t> out(n, Vocabulary::bos_id);
    const std::size_t take = std::min(n, history.size());
    std::copy(history.end() - static_cast<std::ptrdiff_t>(take), history.end(),
              out.end() - static_cast<std::ptrdiff_t>(take));
    return out;
}

}  // namespace

NgramModel::NgramModel(std::shared_ptr<const Vocabulary> vocab, NgramConfig config, NgramCounts counts,
                       CheckpointId id)
    : vocab_(std::move(vocab)), config_(config), counts_(std::move(counts)), id_(id) {
    if (config_.order < 1) throw Error(ErrorCode::usage, "n-gram order must be >= 1");
    if (!(config_.k >= 0.0)) throw Error(ErrorCode::usage, "add-k constant must be >= 0");
    if (config_.smoothing == Smoothing::kneser_ney && !(config_.discount > 0.0 && config_.discount <= 1.0))
        throw Error(ErrorCode::usage, "Kneser-Ney discount must be in (0, 1]");
    counts_.ngrams.resize(config_.order);
    counts_.histories.resize(config_.order);
    if (config_.smoothing == Smoothing::kneser_ney) build_continuations();
}

void NgramModel::build_continuations() {
    const std::size_t order = config_.order;
    cont_ngrams_.assign(order, {});
    cont_histories_.assign(order, {});
    cont_history_types_.assign(order, {});
    history_types_.assign(order, {});
    const std::size_t w = sizeof(std::uint32_t);
    for (const auto& [key, c] : counts_.ngrams[order - 1])
        if (c > 0) ++history_types_[order - 1][key.substr(0, key.size() - w)];
    for (std::size_t n = order; n >= 2; --n) {
        for (const auto& [key, c] : counts_.ngrams[n - 1])
            if (c > 0) ++cont_ngrams_[n - 2][key.substr(w)];
        for (const auto& [key, c] : cont_ngrams_[n - 2]) {
            auto hist = key.substr(0, key.size() - w);
            cont_histories_[n - 2][hist] += c;
            ++cont_history_types_[n - 2][hist];
        }
    }
}

NgramModel NgramModel::train_batch(const Corpus& corpus, const NgramConfig& config) {
    if (corpus.empty()) throw Error(ErrorCode::empty_corpus, "cannot train on an empty corpus");
    auto vocab = std::make_shared<const Vocabulary>(corpus.inventory());
    NgramCounts counts;
    counts.ngrams.resize(config.order);
    counts.histories.resize(config.order);
    for (const auto& utt : corpus.utterances())
        for (std::size_t i = 0; i < utt.size(); ++i) add_position(counts, *vocab, config.order, utt, i);
    const auto steps = static_cast<std::int64_t>(counts.positions);
    return NgramModel(std::move(vocab), config, std::move(counts), CheckpointId{steps, 0});
}

double NgramModel::prob(std::span<const std::uint32_t> history, std::uint32_t word) const {
    auto h = tail(history, config_.order - 1);
    switch (config_.smoothing) {
    case Smoothing::add_k: return prob_add_k(h, word);
    case Smoothing::interpolated_add_k: return prob_interpolated(h, word, config_.order);
    case Smoothing::kneser_ney: return prob_kn(h, word, config_.order);
    }
    return 0.0;
}

double NgramModel::prob_add_k(std::span<const std::uint32_t> history, std::uint32_t word) const {
    const std::size_t n = config_.order;
    std::vector<std::uint32_t> ids(history.begin(), history.end());
    const auto hkey = pack_ids(ids.data(), ids.size());
    ids.push_back(word);
    const auto key = pack_ids(ids.data(), ids.size());
    const double V = static_cast<double>(vocab_->predictive_size());
    const double c = static_cast<double>(lookup(counts_.ngrams[n - 1], key));
    const double ch = static_cast<double>(lookup(counts_.histories[n - 1], hkey));
    const double denom = ch + config_.k * V;
    // Unseen history with k = 0 carries no information: uniform.
    if (denom <= 0.0) return 1.0 / V;
    return (c + config_.k) / denom;
}

double NgramModel::prob_interpolated(std::span<const std::uint32_t> history, std::uint32_t word,
                                     std::size_t order) const {
    const double V = static_cast<double>(vocab_->predictive_size());
    if (order == 0) return 1.0 / V;
    const double lower = prob_interpolated(history, word, order - 1);
    std::vector<std::uint32_t> ids(history.end() - static_cast<std::ptrdiff_t>(order - 1), history.end());
    const auto hkey = pack_ids(ids.data(), ids.size());
    ids.push_back(word);
    const auto key = pack_ids(ids.data(), ids.size());
    const double c = static_cast<double>(lookup(counts_.ngrams[order - 1], key));
    const double ch = static_cast<double>(lookup(counts_.histories[order - 1], hkey));
    const double denom = ch + config_.k * V;
    if (denom <= 0.0) return lower;
    return (c + config_.k * V * lower) / denom;
}

double NgramModel::prob_kn(std::span<const std::uint32_t> history, std::uint32_t word, std::size_t order) const {
    const double V = static_cast<double>(vocab_->predictive_size());
    if (order == 0) return 1.0 / V;
    const double lower = prob_kn(history, word, order - 1);
    std::vector<std::uint32_t> ids(history.end() - static_cast<std::ptrdiff_t>(order - 1), history.end());
    const auto hkey = pack_ids(ids.data(), ids.size());
    ids.push_back(word);
    const auto key = pack_ids(ids.data(), ids.size());

    double c = 0.0, denom = 0.0, types = 0.0;
    if (order == config_.order) {
        c = static_cast<double>(lookup(counts_.ngrams[order - 1], key));
        denom = static_cast<double>(lookup(counts_.histories[order - 1], hkey));
        types = static_cast<double>(lookup(history_types_[order - 1], hkey));
    } else {
        c = static_cast<double>(lookup(cont_ngrams_[order - 1], key));
        denom = static_cast<double>(lookup(cont_histories_[order - 1], hkey));
        types = static_cast<double>(lookup(cont_history_types_[order - 1], hkey));
    }
    if (denom <= 0.0) return lower;
    const double d = config_.discount;
    return std::max(c - d, 0.0) / denom + d * types / denom * lower;
}

double NgramModel::log_prob_word(const Token& word, std::span<const Token> context) const {
    std::vector<std::uint32_t> hist;
    const std::size_t keep = std::min(context.size(), config_.order - 1);
    for (std::size_t i = context.size() - keep; i < context.size(); ++i) hist.push_back(vocab_->id(context[i]));
    return std::log(prob(hist, vocab_->id(word)));
}

double NgramModel::log_prob_context(std::span<const Token> context) const {
    std::vector<std::uint32_t> ids;
    ids.reserve(context.size());
    for (const auto& t : context) ids.push_back(vocab_->id(t));
    double total = 0.0;
    for (std::size_t i = 0; i < ids.size(); ++i)
        total += std::log(prob(std::span<const std::uint32_t>(ids.data(), i), ids[i]));
    return total;
}

std::uint64_t NgramModel::count(std::span<const Token> ngram) const {
    if (ngram.empty() || ngram.size() > config_.order) return 0;
    std::vector<std::uint32_t> ids;
    for (const auto& t : ngram) ids.push_back(t == "<s>" ? Vocabulary::bos_id : vocab_->id(t));
    return lookup(counts_.ngrams[ngram.size() - 1], pack_ids(ids.data(), ids.size()));
}

std::vector<Position> shuffled_positions(const Corpus& corpus, std::uint64_t seed) {
    std::vector<Position> ordered;
    ordered.reserve(corpus.total_tokens());
    const auto& utts = corpus.utterances();
    for (std::size_t u = 0; u < utts.size(); ++u)
        for (std::size_t i = 0; i < utts[u].size(); ++i) ordered.push_back({u, i});
    std::vector<Position> out;
    out.reserve(ordered.size());
    for (std::size_t idx : shuffled_indices(ordered.size(), seed)) out.push_back(ordered[idx]);
    return out;
}

void add_position(NgramCounts& counts, const Vocabulary& vocab, std::size_t order, const TokenSeq& utt,
                  std::size_t pos) {
    std::vector<std::uint32_t> ids(order, Vocabulary::bos_id);
    for (std::size_t j = 0; j < order; ++j) {
        // ids[order-1] is the predicted token, earlier slots are history
        const std::ptrdiff_t src = static_cast<std::ptrdiff_t>(pos) - static_cast<std::ptrdiff_t>(order - 1 - j);
        if (src >= 0) ids[j] = vocab.id(utt[static_cast<std::size_t>(src)]);
    }
    for (std::size_t n = 1; n <= order; ++n) {
        const std::uint32_t* start = ids.data() + (order - n);
        ++counts.ngrams[n - 1][pack_ids(start, n)];
        ++counts.histories[n - 1][pack_ids(start, n - 1)];
    }
    ++counts.positions;
}

void train_ngram_streaming(const Corpus& corpus, const NgramConfig& config, const std::vector<std::int64_t>& schedule,
                           std::uint64_t seed, const std::function<void(const NgramModel&)>& emit) {
    if (corpus.empty()) throw Error(ErrorCode::empty_corpus, "cannot train on an empty corpus");
    if (config.order < 1) throw Error(ErrorCode::usage, "n-gram order must be >= 1");
    if (schedule.empty()) throw Error(ErrorCode::usage, "checkpoint schedule is empty");
    for (std::size_t i = 0; i < schedule.size(); ++i) {
        if (schedule[i] < 1 || (i && schedule[i] <= schedule[i - 1]))
            throw Error(ErrorCode::usage, "checkpoint schedule must be positive and strictly increasing");
    }
    if (schedule.back() > static_cast<std::int64_t>(corpus.total_tokens()))
        throw Error(ErrorCode::usage, "checkpoint step " + std::to_string(schedule.back()) + " exceeds the " +
                                          std::to_string(corpus.total_tokens()) + " corpus positions");

    auto vocab = std::make_shared<const Vocabulary>(corpus.inventory());
    const auto positions = shuffled_positions(corpus, seed);
    NgramCounts counts;
    counts.ngrams.resize(config.order);
    counts.histories.resize(config.order);
    std::size_t next = 0;
    for (std::int64_t step : schedule) {
        while (static_cast<std::int64_t>(next) < step) {
            const auto& p = positions[next++];
            add_position(counts, *vocab, config.order, corpus.utterances()[p.utterance], p.token);
        }
        emit(NgramModel(vocab, config, counts, CheckpointId{step, static_cast<std::int64_t>(seed)}));
    }
}

CheckpointSeries train_ngram(const Corpus& corpus, const NgramConfig& config,
                             const std::vector<std::int64_t>& schedule, std::uint64_t seed) {
    CheckpointSeries series;
    series.seed = static_cast<std::int64_t>(seed);
    train_ngram_streaming(corpus, config, schedule, seed, [&](const NgramModel& m) {
        series.checkpoints.push_back({m.checkpoint().step, std::make_shared<NgramModel>(m)});
    });
    series.total_steps = schedule.back();
    return series;
}

std::vector<std::int64_t> geometric_schedule(std::int64_t total, std::size_t count, double first_fraction) {
    if (total < 1 || count < 1) throw Error(ErrorCode::usage, "schedule needs total >= 1 and count >= 1");
    if (!(first_fraction > 0.0 && first_fraction <= 1.0))
        throw Error(ErrorCode::usage, "first_fraction must be in (0, 1]");
    std::vector<std::int64_t> out;
    for (std::size_t i = 0; i < count; ++i) {
        const double frac = count == 1 ? 1.0
                                       : std::exp(std::log(first_fraction) *
                                                  (1.0 - static_cast<double>(i) / static_cast<double>(count - 1)));
        auto step = static_cast<std::int64_t>(std::llround(frac * static_cast<double>(total)));
        step = std::clamp<std::int64_t>(step, 1, total);
        if (out.empty() || step > out.back()) out.push_back(step);
    }
    if (out.back() != total) out.push_back(total);
    return out;
}

}  // namespace lexsig
