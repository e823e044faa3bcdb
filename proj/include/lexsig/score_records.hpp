#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "lexsig/scorer.hpp"

namespace lexsig {

// One scored (word, context, checkpoint) triple. At least one of log_q and
// log_r is present; every present value is <= 0.
struct ScoreRecord {
    std::string word;
    std::string context_id;
    std::int64_t step = 0;
    std::int64_t seed = 0;
    std::optional<double> log_q;
    std::optional<double> log_q_c;
    std::optional<double> log_r;

    bool operator==(const ScoreRecord&) const = default;
};

// One JSON object per line, keys in schema order.
std::string format_score_record(const ScoreRecord& record);
ScoreRecord parse_score_record(const std::string& line, const std::string& source, std::size_t lineno);

// `contexts.jsonl` sidecar: {"context_id", "tokens"} per line.
void write_context_entry(std::ostream& out, const TokenSeq& tokens);
std::map<std::string, TokenSeq> read_context_sidecar(const std::filesystem::path& path);

struct ScoreValues {
    std::optional<double> log_q;
    std::optional<double> log_q_c;
    std::optional<double> log_r;
};

using TripleKey = std::pair<std::string, std::string>;  // word, context_id

// Scorer answering exactly the triples of one checkpoint present in a score
// file.
class RecordScorer : public Scorer {
public:
    RecordScorer(CheckpointId id, std::map<TripleKey, ScoreValues> values,
                 std::shared_ptr<const std::map<TripleKey, double>> shared_reference);

    double log_prob_word(const Token& word, std::span<const Token> context) const override;
    bool scores_context_prob() const override { return has_context_prob_; }
    double log_prob_context(std::span<const Token> context) const override;
    CheckpointId checkpoint() const override { return id_; }

    // log r(w | c): from this checkpoint's record, else from any record in
    // the store that carries a reference score for the pair.
    bool scores_reference() const noexcept { return has_reference_; }
    std::optional<double> log_prob_reference(const Token& word, std::span<const Token> context) const;

    bool has_triple(const Token& word, std::span<const Token> context) const;
    std::size_t size() const noexcept { return values_.size(); }

private:
    const ScoreValues& find(const Token& word, std::span<const Token> context) const;

    CheckpointId id_;
    std::map<TripleKey, ScoreValues> values_;
    std::shared_ptr<const std::map<TripleKey, double>> shared_reference_;
    std::map<std::string, double> context_log_prob_;
    bool has_context_prob_ = false;
    bool has_reference_ = false;
};

class ScoreRecordStore {
public:
    void add(const ScoreRecord& record, const std::string& source, std::size_t lineno);
    // Seals the store; builds the per-checkpoint scorers.
    void finish();

    std::vector<CheckpointId> checkpoints() const;
    std::shared_ptr<const RecordScorer> scorer(CheckpointId id) const;
    std::size_t record_count() const noexcept { return record_count_; }

private:
    std::map<CheckpointId, std::map<TripleKey, ScoreValues>> pending_;
    std::map<CheckpointId, std::shared_ptr<const RecordScorer>> scorers_;
    std::size_t record_count_ = 0;
};

// Loads one JSONL file, or every `*.jsonl` file except `contexts.jsonl` in a
// directory (sorted by name).
ScoreRecordStore load_score_records(const std::filesystem::path& path);

}  // namespace lexsig
