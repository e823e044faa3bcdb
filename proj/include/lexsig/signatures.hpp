#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "lexsig/toy_language.hpp"

namespace lexsig {

enum class Family { truth, intrinsic, reference };
enum class SignaturePolarity { positive, negative, all };

const char* family_name(Family f);  // "true", "intrinsic", "reference"
const char* signature_polarity_name(SignaturePolarity p);  // "positive", "negative", "all"
Family parse_family(const std::string& s);
SignaturePolarity parse_signature_polarity(const std::string& s);

struct SignatureKind {
    Family family = Family::truth;
    SignaturePolarity polarity = SignaturePolarity::positive;

    auto operator<=>(const SignatureKind&) const = default;
};

// The 3x3 grid, row-major: true, intrinsic, reference.
const std::array<SignatureKind, 9>& all_signature_kinds();

// Short labels: S+ S- S+- SI+ SI- SI+- SR+ SR- SR+-.
std::string signature_label(SignatureKind kind);
SignatureKind parse_signature_label(const std::string& label);

// Context polarity whose sample feeds a signature of this polarity.
Polarity sample_polarity(SignaturePolarity p);

// Scores of one word over one sampled context. `weight` is a per-context
// sampling weight for the true and reference estimators (1 = uniform over
// types); the intrinsic estimator derives its own weights.
struct ContextScore {
    double log_q = 0.0;
    std::optional<double> log_q_c;
    std::optional<double> log_r;
    double weight = 1.0;
};

struct SignatureEstimate {
    double value = 0.0;
    std::size_t sample_size = 0;
    std::optional<double> weight_entropy;  // intrinsic family only
    std::size_t dropped = 0;               // contexts dropped for log q = -inf
};

// Weighted mean surprisal, -sum(weight * log q) / sum(weight).
SignatureEstimate estimate_true(std::span<const ContextScore> scores);

// Self-normalized estimator over the sample with weights proportional to
//   positive: q(w|c) q(c)
//   negative: (1 - q(w|c)) q(c)
//   all:      q(c)
// Weights are normalized in log space.
SignatureEstimate estimate_intrinsic(std::span<const ContextScore> scores, SignaturePolarity polarity);

// Normalized intrinsic weights (after dropping -inf contexts), in input order.
std::vector<double> intrinsic_weights(std::span<const ContextScore> scores, SignaturePolarity polarity);

// Weighted mean of |log q - log r|.
SignatureEstimate estimate_reference(std::span<const ContextScore> scores);

SignatureEstimate estimate_signature(SignatureKind kind, std::span<const ContextScore> scores);

// Exact signature by enumeration over every context up to the longest
// string of the three languages. p is the data distribution, q the model,
// r the reference (used by the reference family only). Contexts where q (or r)
// gives the word zero probability are dropped and the rest renormalized.
double exact_signature(const ToyLanguage& p, const ToyLanguage& q, const ToyLanguage& r, SignatureKind kind,
                       std::span<const Token> word);

struct SignatureValue {
    std::string word;
    SignatureKind kind;
    std::int64_t step = 0;
    std::int64_t seed = 0;
    SignatureEstimate estimate;
};

// CSV `word,family,polarity,step,seed,value,sample_size`.
void write_signature_header(std::ostream& out);
void write_signature_row(std::ostream& out, const SignatureValue& v);
std::vector<SignatureValue> read_signatures(const std::filesystem::path& path);

}  // namespace lexsig
