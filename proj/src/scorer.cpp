#include "lexsig/scorer.hpp"

#include "lexsig/error.hpp"

namespace lexsig {

double Scorer::log_prob_context(std::span<const Token>) const {
    throw Error(ErrorCode::capability_missing, "backend does not score context probabilities");
}

}  // namespace lexsig
