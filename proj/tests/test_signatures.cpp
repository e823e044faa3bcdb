#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>
#include <sstream>

#include "lexsig/signatures.hpp"
#include "support.hpp"

using namespace lexsig;

namespace {

ContextScore score(double q, std::optional<double> qc = {}, std::optional<double> r = {}) {
    return ContextScore{std::log(q), qc ? std::optional<double>(std::log(*qc)) : std::nullopt,
                        r ? std::optional<double>(std::log(*r)) : std::nullopt, 1.0};
}

}  // namespace

TEST_CASE("labels and the grid") {
    CHECK(all_signature_kinds().size() == 9);
    std::set<std::string> labels;
    for (const auto& k : all_signature_kinds()) {
        labels.insert(signature_label(k));
        CHECK(parse_signature_label(signature_label(k)) == k);
    }
    CHECK(labels == std::set<std::string>{"S+", "S-", "S+-", "SI+", "SI-", "SI+-", "SR+", "SR-", "SR+-"});
    CHECK(parse_family("true") == Family::truth);
    CHECK(testing::error_of([] { parse_signature_label("SX"); }) == ErrorCode::usage);
}

TEST_CASE("hand values") {
    std::vector<ContextScore> one{score(0.25)};
    CHECK(estimate_true(one).value == doctest::Approx(1.3863).epsilon(1e-4));
    std::vector<ContextScore> certain{score(1.0), score(1.0)};
    CHECK(estimate_true(certain).value == 0.0);

    std::vector<ContextScore> two{score(0.8, 0.5), score(0.2, 0.5)};
    auto w = intrinsic_weights(two, SignaturePolarity::positive);
    CHECK(w[0] == doctest::Approx(0.8));
    CHECK(w[1] == doctest::Approx(0.2));
    CHECK(estimate_intrinsic(two, SignaturePolarity::positive).value == doctest::Approx(0.5004).epsilon(1e-4));

    std::vector<ContextScore> single{score(0.3, 1e-9)};
    CHECK(intrinsic_weights(single, SignaturePolarity::negative)[0] == 1.0);
    CHECK(estimate_intrinsic(single, SignaturePolarity::negative).value == doctest::Approx(-std::log(0.3)));

    std::vector<ContextScore> ref{score(0.5, {}, 0.25)};
    CHECK(estimate_reference(ref).value == doctest::Approx(0.6931).epsilon(1e-4));
    std::vector<ContextScore> swapped{score(0.25, {}, 0.5)};
    CHECK(estimate_reference(swapped).value == estimate_reference(ref).value);
    std::vector<ContextScore> same{score(0.4, {}, 0.4), score(0.1, {}, 0.1)};
    CHECK(estimate_reference(same).value == 0.0);
}

TEST_CASE("weighted true estimator") {
    std::vector<ContextScore> s{score(0.5), score(0.25)};
    s[0].weight = 3.0;
    CHECK(estimate_true(s).value == doctest::Approx((3 * std::log(2.0) + std::log(4.0)) / 4));
}

TEST_CASE("errors") {
    std::vector<ContextScore> none;
    CHECK(testing::error_of([&] { estimate_true(none); }) == ErrorCode::empty_sample);
    CHECK(testing::error_of([&] { estimate_intrinsic(none, SignaturePolarity::all); }) == ErrorCode::empty_sample);
    std::vector<ContextScore> no_qc{score(0.5)};
    CHECK(testing::error_of([&] { estimate_intrinsic(no_qc, SignaturePolarity::positive); }) ==
          ErrorCode::capability_missing);
    CHECK(testing::error_of([&] { estimate_reference(no_qc); }) == ErrorCode::missing_reference);
    std::vector<ContextScore> zero_c{ContextScore{std::log(0.5), -INFINITY, std::nullopt, 1.0}};
    CHECK(testing::error_of([&] { estimate_intrinsic(zero_c, SignaturePolarity::all); }) ==
          ErrorCode::degenerate_weights);
    std::vector<ContextScore> bad_weight{score(0.5)};
    bad_weight[0].weight = 0.0;
    CHECK(testing::error_of([&] { estimate_true(bad_weight); }) == ErrorCode::usage);
}

TEST_CASE("zero-probability contexts are dropped") {
    std::vector<ContextScore> s{score(0.5, 0.5), ContextScore{-INFINITY, std::log(0.5), std::nullopt, 1.0}};
    auto t = estimate_true(s);
    CHECK(t.value == doctest::Approx(std::log(2.0)));
    CHECK(t.sample_size == 1);
    CHECK(t.dropped == 1);
    CHECK(estimate_intrinsic(s, SignaturePolarity::all).sample_size == 1);
    std::vector<ContextScore> all_zero{ContextScore{-INFINITY, 0.0, std::nullopt, 1.0}};
    CHECK(testing::error_of([&] { estimate_true(all_zero); }) == ErrorCode::empty_sample);
}

TEST_CASE("intrinsic weight properties") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0.01, 0.99);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<ContextScore> s;
        for (int i = 0; i < 10; ++i) s.push_back(score(u(rng), u(rng) * 1e-3));
        for (auto pol : {SignaturePolarity::positive, SignaturePolarity::negative, SignaturePolarity::all}) {
            double total = 0.0;
            for (double w : intrinsic_weights(s, pol)) total += w;
            CHECK(std::abs(total - 1.0) < 1e-12);

            // a common factor on q(c) cancels
            auto shifted = s;
            for (auto& c : shifted) *c.log_q_c -= 40.0;
            CHECK(std::abs(estimate_intrinsic(s, pol).value - estimate_intrinsic(shifted, pol).value) < 1e-12);
        }
        // raising q(w|c_j) never lowers w_j for the positive kind
        const auto before = intrinsic_weights(s, SignaturePolarity::positive);
        auto raised = s;
        raised[4].log_q = std::log(std::min(0.999, std::exp(raised[4].log_q) * 1.5));
        CHECK(intrinsic_weights(raised, SignaturePolarity::positive)[4] >= before[4]);
    }
}

TEST_CASE("intrinsic weights survive extreme log q(c)") {
    std::vector<ContextScore> s{ContextScore{std::log(0.5), -2000.0, std::nullopt, 1.0},
                                ContextScore{std::log(0.25), -2001.0, std::nullopt, 1.0}};
    const double e = std::exp(-1.0);
    const double w0 = 0.5 / (0.5 + 0.25 * e);
    CHECK(intrinsic_weights(s, SignaturePolarity::positive)[0] == doctest::Approx(w0).epsilon(1e-12));
    CHECK(estimate_intrinsic(s, SignaturePolarity::positive).weight_entropy.has_value());
}

TEST_CASE("exact signature on a two-string language") {
    // p = {"a b": 0.6, "b": 0.4}; w = b.
    // p(c|b): [] -> 0.4, [a] -> 0.6; q = p gives q(b|[]) = 0.4, q(b|[a]) = 1.
    ToyLanguage p({"a", "b"}, {{{"a", "b"}, 0.6}, {{"b"}, 0.4}});
    const TokenSeq w{"b"};
    CHECK(exact_signature(p, p, p, {Family::truth, SignaturePolarity::positive}, w) ==
          doctest::Approx(-0.4 * std::log(0.4)).epsilon(1e-12));
    // negative: contexts [] (before a: mass 0.6), [a b] and [b] end there (q(b|c) = 0, dropped),
    // [a] has no non-b follower. Only [] remains.
    CHECK(exact_signature(p, p, p, {Family::truth, SignaturePolarity::negative}, w) ==
          doctest::Approx(-std::log(0.4)).epsilon(1e-12));
    for (const auto& k : all_signature_kinds())
        if (k.family == Family::reference) CHECK(exact_signature(p, p, p, k, w) == 0.0);
}

TEST_CASE("the all-contexts signature decomposes into the two channels") {
    auto p = testing::random_toy({"a", "b", "c"}, 3, 21);
    auto q = testing::random_toy({"a", "b", "c"}, 4, 22);  // longer support: no dropped contexts
    for (const std::string sym : {"a", "b", "c"}) {
        const TokenSeq w{sym};
        double z_pos = 0, z_neg = 0, s_pos = 0, s_neg = 0;
        for (const auto& c : p.enumerate_contexts(4)) {
            auto cw = c;
            cw.push_back(sym);
            const double pos = p.prefix_prob(cw), neg = p.prefix_prob(c) - pos;
            if (pos <= 0 && neg <= 0) continue;
            const double lq = q.log_prob_word(w, c);
            z_pos += pos;
            z_neg += neg;
            s_pos -= pos * lq;
            s_neg -= neg * lq;
        }
        const double sigma_all = exact_signature(p, q, q, {Family::truth, SignaturePolarity::all}, w);
        CHECK(sigma_all == doctest::Approx((s_pos + s_neg) / (z_pos + z_neg)).epsilon(1e-12));
        const double plus = exact_signature(p, q, q, {Family::truth, SignaturePolarity::positive}, w);
        const double minus = exact_signature(p, q, q, {Family::truth, SignaturePolarity::negative}, w);
        CHECK(sigma_all == doctest::Approx((z_pos * plus + z_neg * minus) / (z_pos + z_neg)).epsilon(1e-12));
    }
}

TEST_CASE("estimators fed the exhaustive context set equal the exact values") {
    auto p = testing::toy_a();
    auto q = testing::random_toy({"a", "b", "c"}, 4, 3);
    auto r = testing::random_toy({"a", "b", "c"}, 4, 4);
    for (const std::string sym : {"a", "b", "c"})
        for (const auto& kind : all_signature_kinds()) {
            const TokenSeq w{sym};
            const auto scores = testing::exhaustive_scores(p, q, r, kind, w);
            CHECK(std::abs(estimate_signature(kind, scores).value - exact_signature(p, q, r, kind, w)) < 1e-10);
        }
}

TEST_CASE("reference family behaves as a distance") {
    auto p = testing::toy_b();
    auto q = testing::random_toy({"a", "b", "c", "d"}, 4, 8);
    auto r = testing::random_toy({"a", "b", "c", "d"}, 4, 9);
    for (auto pol : {SignaturePolarity::positive, SignaturePolarity::negative, SignaturePolarity::all}) {
        const SignatureKind k{Family::reference, pol};
        const TokenSeq w{"a"};
        CHECK(exact_signature(p, q, q, k, w) == 0.0);
        CHECK(exact_signature(p, q, r, k, w) == exact_signature(p, r, q, k, w));
        CHECK(exact_signature(p, q, r, k, w) > 0.0);
    }
}

TEST_CASE("signature csv round trip") {
    testing::TempDir dir("sig");
    std::vector<SignatureValue> vals{{"dog", {Family::intrinsic, SignaturePolarity::all}, 100, 2, {0.1 + 0.2, 64}},
                                     {"a,b", {Family::truth, SignaturePolarity::negative}, 5, 1, {3.0, 1}}};
    {
        std::ofstream out(dir / "s.csv");
        write_signature_header(out);
        for (const auto& v : vals) write_signature_row(out, v);
    }
    auto back = read_signatures(dir / "s.csv");
    REQUIRE(back.size() == 2);
    CHECK(back[0].estimate.value == 0.1 + 0.2);
    CHECK(back[0].kind == vals[0].kind);
    CHECK(back[1].word == "a,b");
    CHECK(back[1].estimate.sample_size == 1);
    testing::write(dir / "bad.csv", "word,family,polarity,step,seed,value,sample_size\nx,false,positive,1,1,0.5,1\n");
    try {
        read_signatures(dir / "bad.csv");
        FAIL("expected error");
    } catch (const FormatError& e) {
        CHECK(e.line() == 2);
    }
}
