#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "lexsig/ngram.hpp"
#include "lexsig/score_records.hpp"
#include "lexsig/signatures.hpp"
#include "support.hpp"

using namespace lexsig;

namespace {

ScoreRecord record(const std::string& w, const TokenSeq& ctx, std::int64_t step, std::optional<double> q,
                   std::optional<double> qc = {}, std::optional<double> r = {}) {
    return ScoreRecord{w, context_id(ctx), step, 1, q, qc, r};
}

}  // namespace

TEST_CASE("record round trip") {
    const auto r = record("dog", {"the"}, 10, -1.25, -3.5, -0.125);
    const auto line = format_score_record(r);
    CHECK(line.rfind("{\"word\":\"dog\",\"context_id\":", 0) == 0);
    CHECK(parse_score_record(line, "x", 1) == r);
    const auto bare = record("dog", {}, 3, -0.1 / 3.0);
    CHECK(parse_score_record(format_score_record(bare), "x", 1) == bare);
    CHECK(format_score_record(bare).find("log_r") == std::string::npos);
}

TEST_CASE("format errors carry line numbers") {
    testing::TempDir dir("records");
    const auto path = dir / "s.jsonl";
    testing::write(path, format_score_record(record("a", {}, 1, -0.5)) + "\n" +
                             R"({"word":"a","context_id":"00","step":1,"seed":1,"log_q":0.5})" + "\n");
    try {
        load_score_records(path);
        FAIL("expected a format error");
    } catch (const FormatError& e) {
        CHECK(e.line() == 2);
    }
    CHECK(testing::error_of([] { parse_score_record("not json", "x", 1); }) == ErrorCode::format);
    CHECK(testing::error_of([] { parse_score_record(R"({"word":"a","context_id":"0","step":1,"seed":1})", "x", 1); }) ==
          ErrorCode::format);
    CHECK(testing::error_of([] {
              parse_score_record(R"({"word":"a","context_id":"0","step":1,"seed":1,"log_q":"x"})", "x", 1);
          }) == ErrorCode::format);
    // reference-only records are valid
    CHECK(parse_score_record(R"({"word":"a","context_id":"0","step":1,"seed":1,"log_r":-1})", "x", 1).log_r == -1.0);
}

TEST_CASE("duplicate triples are rejected") {
    testing::TempDir dir("dup");
    const auto line = format_score_record(record("a", {"x"}, 1, -0.5));
    testing::write(dir / "s.jsonl", line + "\n" + line + "\n");
    CHECK(testing::error_of([&] { load_score_records(dir / "s.jsonl"); }) == ErrorCode::format);
}

TEST_CASE("a one-record file answers exactly its triple") {
    testing::TempDir dir("one");
    testing::write(dir / "s.jsonl", format_score_record(record("dog", {"the"}, 7, -0.7)) + "\n");
    auto store = load_score_records(dir / "s.jsonl");
    CHECK(store.record_count() == 1);
    REQUIRE(store.checkpoints().size() == 1);
    auto s = store.scorer({7, 1});
    CHECK(s->log_prob_word("dog", TokenSeq{"the"}) == -0.7);
    CHECK(s->has_triple("dog", TokenSeq{"the"}));
    CHECK(testing::error_of([&] { s->log_prob_word("cat", TokenSeq{"the"}); }) == ErrorCode::missing_triple);
    CHECK(testing::error_of([&] { s->log_prob_word("dog", TokenSeq{"a"}); }) == ErrorCode::missing_triple);
    CHECK_FALSE(s->scores_context_prob());
    CHECK(testing::error_of([&] { s->log_prob_context(TokenSeq{"the"}); }) == ErrorCode::capability_missing);
    CHECK_FALSE(s->scores_reference());
    CHECK(testing::error_of([&] { store.scorer({8, 1}); }) == ErrorCode::missing_triple);
}

TEST_CASE("directory load and shared reference scores") {
    testing::TempDir dir("dir");
    testing::write(dir / "seed1_step1.jsonl", format_score_record(record("a", {"x"}, 1, -0.5, -1.0, -0.25)) + "\n");
    testing::write(dir / "seed1_step2.jsonl", format_score_record(record("a", {"x"}, 2, -0.4, -0.9)) + "\n");
    testing::write(dir / "contexts.jsonl", "{\"context_id\":\"" + context_id(TokenSeq{"x"}) + "\",\"tokens\":[\"x\"]}\n");
    auto store = load_score_records(dir.path());
    CHECK(store.checkpoints().size() == 2);
    auto late = store.scorer({2, 1});
    CHECK(late->scores_context_prob());
    CHECK(late->log_prob_context(TokenSeq{"x"}) == -0.9);
    CHECK(late->scores_reference());
    CHECK(late->log_prob_reference("a", TokenSeq{"x"}) == -0.25);
    CHECK_FALSE(late->log_prob_reference("b", TokenSeq{"x"}));
}

TEST_CASE("context sidecar") {
    testing::TempDir dir("sidecar");
    {
        std::ofstream out(dir / "contexts.jsonl");
        write_context_entry(out, {"the", "cat"});
        write_context_entry(out, {});
    }
    auto m = read_context_sidecar(dir / "contexts.jsonl");
    CHECK(m.size() == 2);
    CHECK(m.at(context_id(TokenSeq{"the", "cat"})) == TokenSeq{"the", "cat"});
    testing::write(dir / "bad.jsonl", "{\"context_id\":\"0000000000000000\",\"tokens\":[\"x\"]}\n");
    CHECK(testing::error_of([&] { read_context_sidecar(dir / "bad.jsonl"); }) == ErrorCode::format);
}

TEST_CASE("n-gram scores exported and reloaded give identical signatures") {
    Corpus corpus({{"the", "dog", "ran"}, {"the", "cat", "sat"}, {"a", "dog", "sat"}, {"the", "dog", "sat", "down"}});
    auto series = train_ngram(corpus, {2, Smoothing::interpolated_add_k, 0.1}, {5, 13}, 2);
    auto ref = NgramModel::train_batch(corpus, {3, Smoothing::interpolated_add_k, 0.01});
    const std::vector<TokenSeq> contexts{{}, {"the"}, {"a"}, {"the", "cat"}, {"the", "dog", "sat"}};
    const std::string word = "dog";

    testing::TempDir dir("export");
    {
        std::ofstream out(dir / "scores.jsonl");
        for (const auto& cp : series.checkpoints)
            for (const auto& c : contexts)
                out << format_score_record(ScoreRecord{word, context_id(c), cp.step, 2,
                                                       cp.scorer->log_prob_word(word, c),
                                                       cp.scorer->log_prob_context(c), ref.log_prob_word(word, c)})
                    << '\n';
    }
    auto store = load_score_records(dir / "scores.jsonl");
    for (const auto& cp : series.checkpoints) {
        auto loaded = store.scorer({cp.step, 2});
        std::vector<ContextScore> direct, reloaded;
        for (const auto& c : contexts) {
            direct.push_back({cp.scorer->log_prob_word(word, c), cp.scorer->log_prob_context(c),
                              ref.log_prob_word(word, c)});
            reloaded.push_back({loaded->log_prob_word(word, c), loaded->log_prob_context(c),
                                loaded->log_prob_reference(word, c)});
        }
        for (const auto& kind : all_signature_kinds())
            CHECK(std::abs(estimate_signature(kind, direct).value - estimate_signature(kind, reloaded).value) <
                  1e-12);
    }
}
