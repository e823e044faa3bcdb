#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "lexsig/tokens.hpp"

namespace lexsig {

struct CheckpointId {
    std::int64_t step = 0;
    std::int64_t seed = 0;

    auto operator<=>(const CheckpointId&) const = default;
};

// Scoring interface over one checkpoint: log q(w | c) and, optionally,
// log q(c). Implementations are immutable and safe for concurrent queries.
class Scorer {
public:
    virtual ~Scorer() = default;

    virtual double log_prob_word(const Token& word, std::span<const Token> context) const = 0;

    virtual bool scores_context_prob() const { return false; }
    // Throws CapabilityMissing unless scores_context_prob().
    virtual double log_prob_context(std::span<const Token> context) const;

    virtual CheckpointId checkpoint() const { return {}; }
};

struct Checkpoint {
    std::int64_t step = 0;
    std::shared_ptr<const Scorer> scorer;
};

struct CheckpointSeries {
    std::vector<Checkpoint> checkpoints;  // strictly increasing steps
    std::int64_t total_steps = 0;
    std::int64_t seed = 0;
};

}  // namespace lexsig
