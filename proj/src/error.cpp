#include "lexsig/error.hpp"

namespace lexsig {

const char* error_code_name(ErrorCode code) {
    switch (code) {
    case ErrorCode::usage: return "UsageError";
    case ErrorCode::word_absent: return "WordAbsent";
    case ErrorCode::format: return "FormatError";
    case ErrorCode::missing_triple: return "MissingTriple";
    case ErrorCode::capability_missing: return "CapabilityMissing";
    case ErrorCode::zero_prefix: return "ZeroPrefix";
    case ErrorCode::backend_failure: return "BackendFailure";
    case ErrorCode::empty_corpus: return "EmptyCorpus";
    case ErrorCode::empty_sample: return "EmptySample";
    case ErrorCode::degenerate_weights: return "DegenerateWeights";
    case ErrorCode::missing_reference: return "MissingReference";
    case ErrorCode::degenerate_word: return "DegenerateWord";
    case ErrorCode::window_too_large: return "WindowTooLarge";
    case ErrorCode::degenerate_variance: return "DegenerateVariance";
    case ErrorCode::rank_deficient: return "RankDeficient";
    case ErrorCode::insufficient_data: return "InsufficientData";
    case ErrorCode::never_acquired: return "NeverAcquired";
    case ErrorCode::stage_mismatch: return "StageMismatch";
    }
    return "Error";
}

int exit_status(ErrorCode code) {
    switch (code) {
    case ErrorCode::usage: return 1;
    case ErrorCode::capability_missing:
    case ErrorCode::missing_reference: return 3;
    default: return 2;
    }
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(error_code_name(code)) + ": " + message), code_(code) {}

FormatError::FormatError(const std::string& source, std::size_t line, const std::string& message)
    : Error(ErrorCode::format, source + ":" + std::to_string(line) + ": " + message), line_(line) {}

}  // namespace lexsig
