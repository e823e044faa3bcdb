#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace lexsig {

enum class ErrorCode {
    usage,
    word_absent,
    format,
    missing_triple,
    capability_missing,
    zero_prefix,
    backend_failure,
    empty_corpus,
    empty_sample,
    degenerate_weights,
    missing_reference,
    degenerate_word,
    window_too_large,
    degenerate_variance,
    rank_deficient,
    insufficient_data,
    never_acquired,
    stage_mismatch,
};

const char* error_code_name(ErrorCode code);

// Process exit status for an error: 1 usage, 2 data/format, 3 capability.
int exit_status(ErrorCode code);

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message);

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

// Format error carrying the 1-based line number of the offending input line.
class FormatError : public Error {
public:
    FormatError(const std::string& source, std::size_t line, const std::string& message);

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

}  // namespace lexsig
