#include "lexsig/score_records.hpp"

#include <algorithm>
#include <cmath>

#include "json.hpp"
#include "lexsig/error.hpp"
#include "lexsig/io.hpp"

namespace lexsig {

using nlohmann::json;
using nlohmann::ordered_json;

std::string format_score_record(const ScoreRecord& r) {
    ordered_json j;
    j["word"] = r.word;
    j["context_id"] = r.context_id;
    j["step"] = r.step;
    j["seed"] = r.seed;
    if (r.log_q) j["log_q"] = *r.log_q;
    if (r.log_q_c) j["log_q_c"] = *r.log_q_c;
    if (r.log_r) j["log_r"] = *r.log_r;
    return j.dump();
}

namespace {

std::optional<double> log_field(const json& j, const char* name, const std::string& source, std::size_t lineno) {
    if (!j.contains(name) || j[name].is_null()) return std::nullopt;
    if (!j[name].is_number()) throw FormatError(source, lineno, std::string("`") + name + "` must be a number");
    const double v = j[name].get<double>();
    if (std::isnan(v) || v > 0.0)
        throw FormatError(source, lineno, std::string("`") + name + "` must be <= 0, got " + format_double(v));
    return v;
}

}  // namespace

ScoreRecord parse_score_record(const std::string& line, const std::string& source, std::size_t lineno) {
    json j;
    try {
        j = json::parse(line);
    } catch (const json::exception& e) {
        throw FormatError(source, lineno, e.what());
    }
    if (!j.is_object()) throw FormatError(source, lineno, "expected a JSON object");
    ScoreRecord r;
    try {
        r.word = j.at("word").get<std::string>();
        r.context_id = j.at("context_id").get<std::string>();
        r.step = j.at("step").get<std::int64_t>();
        r.seed = j.at("seed").get<std::int64_t>();
    } catch (const json::exception& e) {
        throw FormatError(source, lineno, e.what());
    }
    r.log_q = log_field(j, "log_q", source, lineno);
    r.log_q_c = log_field(j, "log_q_c", source, lineno);
    r.log_r = log_field(j, "log_r", source, lineno);
    if (!r.log_q && !r.log_r) throw FormatError(source, lineno, "record carries neither `log_q` nor `log_r`");
    return r;
}

void write_context_entry(std::ostream& out, const TokenSeq& tokens) {
    ordered_json j;
    j["context_id"] = context_id(tokens);
    j["tokens"] = tokens;
    out << j.dump() << '\n';
}

std::map<std::string, TokenSeq> read_context_sidecar(const std::filesystem::path& path) {
    std::map<std::string, TokenSeq> out;
    const std::string src = path.string();
    for_each_data_line(path, [&](std::size_t lineno, const std::string& line) {
        try {
            auto j = json::parse(line);
            auto id = j.at("context_id").get<std::string>();
            auto toks = j.at("tokens").get<TokenSeq>();
            if (context_id(toks) != id) throw FormatError(src, lineno, "context_id does not match its tokens");
            out.emplace(std::move(id), std::move(toks));
        } catch (const FormatError&) {
            throw;
        } catch (const std::exception& e) {
            throw FormatError(src, lineno, e.what());
        }
    });
    return out;
}

RecordScorer::RecordScorer(CheckpointId id, std::map<TripleKey, ScoreValues> values,
                           std::shared_ptr<const std::map<TripleKey, double>> shared_reference)
    : id_(id), values_(std::move(values)), shared_reference_(std::move(shared_reference)) {
    has_context_prob_ = !values_.empty();
    has_reference_ = !values_.empty();
    for (const auto& [key, v] : values_) {
        if (!v.log_q_c)
            has_context_prob_ = false;
        else
            context_log_prob_.emplace(key.second, *v.log_q_c);
        if (!v.log_r && !(shared_reference_ && shared_reference_->count(key))) has_reference_ = false;
    }
}

const ScoreValues& RecordScorer::find(const Token& word, std::span<const Token> context) const {
    auto it = values_.find({word, context_id(context)});
    if (it == values_.end())
        throw Error(ErrorCode::missing_triple, "no score for word '" + word + "' in context " + context_id(context) +
                                                   " at step " + std::to_string(id_.step) + " seed " +
                                                   std::to_string(id_.seed));
    return it->second;
}

bool RecordScorer::has_triple(const Token& word, std::span<const Token> context) const {
    return values_.count({word, context_id(context)}) > 0;
}

double RecordScorer::log_prob_word(const Token& word, std::span<const Token> context) const {
    const auto& v = find(word, context);
    if (!v.log_q) throw Error(ErrorCode::capability_missing, "record for '" + word + "' has no `log_q`");
    return *v.log_q;
}

double RecordScorer::log_prob_context(std::span<const Token> context) const {
    if (!has_context_prob_) throw Error(ErrorCode::capability_missing, "score records lack `log_q_c`");
    const auto id = context_id(context);
    auto it = context_log_prob_.find(id);
    if (it == context_log_prob_.end()) throw Error(ErrorCode::missing_triple, "no score for context " + id);
    return it->second;
}

std::optional<double> RecordScorer::log_prob_reference(const Token& word, std::span<const Token> context) const {
    TripleKey key{word, context_id(context)};
    auto it = values_.find(key);
    if (it != values_.end() && it->second.log_r) return it->second.log_r;
    if (shared_reference_) {
        auto jt = shared_reference_->find(key);
        if (jt != shared_reference_->end()) return jt->second;
    }
    return std::nullopt;
}

void ScoreRecordStore::add(const ScoreRecord& r, const std::string& source, std::size_t lineno) {
    auto& table = pending_[CheckpointId{r.step, r.seed}];
    auto [it, inserted] = table.emplace(TripleKey{r.word, r.context_id}, ScoreValues{r.log_q, r.log_q_c, r.log_r});
    if (!inserted) throw FormatError(source, lineno, "duplicate record for (" + r.word + ", " + r.context_id + ")");
    ++record_count_;
}

void ScoreRecordStore::finish() {
    auto reference = std::make_shared<std::map<TripleKey, double>>();
    for (const auto& [id, table] : pending_)
        for (const auto& [key, v] : table)
            if (v.log_r) reference->emplace(key, *v.log_r);
    for (auto& [id, table] : pending_) scorers_[id] = std::make_shared<RecordScorer>(id, std::move(table), reference);
    pending_.clear();
}

std::vector<CheckpointId> ScoreRecordStore::checkpoints() const {
    std::vector<CheckpointId> out;
    for (const auto& [id, s] : scorers_) out.push_back(id);
    return out;
}

std::shared_ptr<const RecordScorer> ScoreRecordStore::scorer(CheckpointId id) const {
    auto it = scorers_.find(id);
    if (it == scorers_.end())
        throw Error(ErrorCode::missing_triple,
                    "no records for step " + std::to_string(id.step) + " seed " + std::to_string(id.seed));
    return it->second;
}

ScoreRecordStore load_score_records(const std::filesystem::path& path) {
    namespace fs = std::filesystem;
    std::vector<fs::path> files;
    if (fs::is_directory(path)) {
        for (const auto& entry : fs::directory_iterator(path))
            if (entry.path().extension() == ".jsonl" && entry.path().filename() != "contexts.jsonl")
                files.push_back(entry.path());
        std::sort(files.begin(), files.end());
    } else {
        files.push_back(path);
    }
    ScoreRecordStore store;
    for (const auto& f : files) {
        const std::string src = f.string();
        for_each_data_line(f, [&](std::size_t lineno, const std::string& line) {
            store.add(parse_score_record(line, src, lineno), src, lineno);
        });
    }
    store.finish();
    return store;
}

}  // namespace lexsig
