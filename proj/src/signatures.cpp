#include "lexsig/signatures.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <spdlog/spdlog.h>

#include "lexsig/error.hpp"
#include "lexsig/io.hpp"

namespace lexsig {

const char* family_name(Family f) {
    switch (f) {
    case Family::truth: return "true";
    case Family::intrinsic: return "intrinsic";
    case Family::reference: return "reference";
    }
    return "?";
}

const char* signature_polarity_name(SignaturePolarity p) {
    switch (p) {
    case SignaturePolarity::positive: return "positive";
    case SignaturePolarity::negative: return "negative";
    case SignaturePolarity::all: return "all";
    }
    return "?";
}

Family parse_family(const std::string& s) {
    if (s == "true") return Family::truth;
    if (s == "intrinsic") return Family::intrinsic;
    if (s == "reference") return Family::reference;
    throw Error(ErrorCode::format, "unknown signature family '" + s + "'");
}

SignaturePolarity parse_signature_polarity(const std::string& s) {
    if (s == "positive") return SignaturePolarity::positive;
    if (s == "negative") return SignaturePolarity::negative;
    if (s == "all") return SignaturePolarity::all;
    throw Error(ErrorCode::format, "unknown signature polarity '" + s + "'");
}

const std::array<SignatureKind, 9>& all_signature_kinds() {
    static const std::array<SignatureKind, 9> kinds = [] {
        std::array<SignatureKind, 9> out{};
        std::size_t i = 0;
        for (auto f : {Family::truth, Family::intrinsic, Family::reference})
            for (auto p : {SignaturePolarity::positive, SignaturePolarity::negative, SignaturePolarity::all})
                out[i++] = {f, p};
        return out;
    }();
    return kinds;
}

std::string signature_label(SignatureKind kind) {
    std::string out = "S";
    if (kind.family == Family::intrinsic) out += "I";
    if (kind.family == Family::reference) out += "R";
    switch (kind.polarity) {
    case SignaturePolarity::positive: out += "+"; break;
    case SignaturePolarity::negative: out += "-"; break;
    case SignaturePolarity::all: out += "+-"; break;
    }
    return out;
}

SignatureKind parse_signature_label(const std::string& label) {
    for (const auto& k : all_signature_kinds())
        if (signature_label(k) == label) return k;
    throw Error(ErrorCode::usage, "unknown signature '" + label + "'");
}

Polarity sample_polarity(SignaturePolarity p) {
    switch (p) {
    case SignaturePolarity::positive: return Polarity::positive;
    case SignaturePolarity::negative: return Polarity::negative;
    case SignaturePolarity::all: return Polarity::marginal;
    }
    return Polarity::marginal;
}

namespace {

void check_weight(double w) {
    if (!(w > 0.0) || !std::isfinite(w)) throw Error(ErrorCode::usage, "context weights must be positive and finite");
}

SignatureEstimate weighted_mean(std::span<const ContextScore> scores, bool reference) {
    if (scores.empty()) throw Error(ErrorCode::empty_sample, "signature needs at least one context");
    double num = 0.0, den = 0.0;
    SignatureEstimate est;
    for (const auto& s : scores) {
        check_weight(s.weight);
        double x = 0.0;
        if (reference) {
            if (!s.log_r) throw Error(ErrorCode::missing_reference, "context lacks a reference score");
            if (std::isinf(s.log_q) || std::isinf(*s.log_r)) {
                ++est.dropped;
                continue;
            }
            x = std::abs(s.log_q - *s.log_r);
        } else {
            if (std::isinf(s.log_q)) {
                ++est.dropped;
                continue;
            }
            x = -s.log_q;
        }
        num += s.weight * x;
        den += s.weight;
        ++est.sample_size;
    }
    if (est.dropped) spdlog::warn("dropped {} zero-probability context(s) from a signature sample", est.dropped);
    if (est.sample_size == 0) throw Error(ErrorCode::empty_sample, "every context had zero probability");
    est.value = num / den;
    return est;
}

// Log of the unnormalized intrinsic weight; -inf means zero weight.
double log_intrinsic_weight(const ContextScore& s, SignaturePolarity polarity) {
    const double log_c = *s.log_q_c;
    switch (polarity) {
    case SignaturePolarity::positive: return s.log_q + log_c;
    case SignaturePolarity::negative: {
        // log(1 - exp(log_q)), stable on both ends
        const double lq = s.log_q;
        const double log1m = lq > -0.6931471805599453 ? std::log(-std::expm1(lq)) : std::log1p(-std::exp(lq));
        return log1m + log_c;
    }
    case SignaturePolarity::all: return log_c;
    }
    return -INFINITY;
}

struct IntrinsicTerms {
    std::vector<double> weights;
    std::vector<double> log_q;
    std::size_t dropped = 0;
};

IntrinsicTerms intrinsic_terms(std::span<const ContextScore> scores, SignaturePolarity polarity) {
    if (scores.empty()) throw Error(ErrorCode::empty_sample, "signature needs at least one context");
    IntrinsicTerms t;
    std::vector<double> logw;
    for (const auto& s : scores) {
        if (!s.log_q_c) throw Error(ErrorCode::capability_missing, "intrinsic signatures need log q(c)");
        if (std::isinf(s.log_q)) {
            ++t.dropped;
            continue;
        }
        logw.push_back(log_intrinsic_weight(s, polarity));
        t.log_q.push_back(s.log_q);
    }
    if (logw.empty()) throw Error(ErrorCode::empty_sample, "every context had zero probability");
    const double top = *std::max_element(logw.begin(), logw.end());
    if (!std::isfinite(top)) throw Error(ErrorCode::degenerate_weights, "intrinsic weights sum to zero");
    double total = 0.0;
    for (double lw : logw) total += std::exp(lw - top);
    t.weights.reserve(logw.size());
    for (double lw : logw) t.weights.push_back(std::exp(lw - top) / total);
    return t;
}

}  // namespace

SignatureEstimate estimate_true(std::span<const ContextScore> scores) { return weighted_mean(scores, false); }

SignatureEstimate estimate_reference(std::span<const ContextScore> scores) { return weighted_mean(scores, true); }

std::vector<double> intrinsic_weights(std::span<const ContextScore> scores, SignaturePolarity polarity) {
    return intrinsic_terms(scores, polarity).weights;
}

SignatureEstimate estimate_intrinsic(std::span<const ContextScore> scores, SignaturePolarity polarity) {
    auto t = intrinsic_terms(scores, polarity);
    SignatureEstimate est;
    est.dropped = t.dropped;
    est.sample_size = t.weights.size();
    double value = 0.0, entropy = 0.0;
    for (std::size_t i = 0; i < t.weights.size(); ++i) {
        const double w = t.weights[i];
        value -= w * t.log_q[i];
        if (w > 0.0) entropy -= w * std::log(w);
    }
    if (t.dropped) spdlog::warn("dropped {} zero-probability context(s) from an intrinsic sample", t.dropped);
    est.value = value;
    est.weight_entropy = entropy;
    return est;
}

SignatureEstimate estimate_signature(SignatureKind kind, std::span<const ContextScore> scores) {
    switch (kind.family) {
    case Family::truth: return estimate_true(scores);
    case Family::intrinsic: return estimate_intrinsic(scores, kind.polarity);
    case Family::reference: return estimate_reference(scores);
    }
    return {};
}

double exact_signature(const ToyLanguage& p, const ToyLanguage& q, const ToyLanguage& r, SignatureKind kind,
                       std::span<const Token> word) {
    const std::size_t max_len = std::max({p.max_length(), q.max_length(), r.max_length()});
    const Polarity pol = sample_polarity(kind.polarity);
    const ToyLanguage& weighting = kind.family == Family::intrinsic ? q : p;
    // Contexts the model gives zero probability (or zero prefix mass) are
    // dropped and the weights renormalized, as the estimators do.
    auto log_word = [&](const ToyLanguage& lang, std::span<const Token> ctx) {
        return lang.prefix_prob(ctx) > 0.0 ? lang.log_prob_word(word, ctx) : -INFINITY;
    };
    double total = 0.0, kept = 0.0;
    for (const auto& [ctx, weight] : context_distribution(weighting, word, pol, max_len)) {
        const double lq = log_word(q, ctx);
        if (std::isinf(lq)) continue;
        if (kind.family == Family::reference) {
            const double lr = log_word(r, ctx);
            if (std::isinf(lr)) continue;
            total += weight * std::abs(lq - lr);
        } else {
            total -= weight * lq;
        }
        kept += weight;
    }
    if (!(kept > 0.0)) throw Error(ErrorCode::empty_sample, "every context has zero model probability");
    return total / kept;
}

void write_signature_header(std::ostream& out) { out << "word,family,polarity,step,seed,value,sample_size\n"; }

void write_signature_row(std::ostream& out, const SignatureValue& v) {
    write_csv_row(out, {v.word, family_name(v.kind.family), signature_polarity_name(v.kind.polarity),
                        std::to_string(v.step), std::to_string(v.seed), format_double(v.estimate.value),
                        std::to_string(v.estimate.sample_size)});
}

std::vector<SignatureValue> read_signatures(const std::filesystem::path& path) {
    const auto table = read_csv(path);
    const std::string src = path.string();
    const auto cw = table.column("word"), cf = table.column("family"), cp = table.column("polarity"),
               cs = table.column("step"), cseed = table.column("seed"), cv = table.column("value"),
               cn = table.column("sample_size");
    std::vector<SignatureValue> out;
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
        const auto& row = table.rows[i];
        const auto ln = table.line_numbers[i];
        SignatureValue v;
        v.word = row[cw];
        try {
            v.kind = {parse_family(row[cf]), parse_signature_polarity(row[cp])};
        } catch (const Error& e) {
            throw FormatError(src, ln, e.what());
        }
        v.step = parse_int(row[cs], src, ln);
        v.seed = parse_int(row[cseed], src, ln);
        v.estimate.value = parse_double(row[cv], src, ln);
        v.estimate.sample_size = static_cast<std::size_t>(parse_int(row[cn], src, ln));
        out.push_back(std::move(v));
    }
    return out;
}

}  // namespace lexsig
