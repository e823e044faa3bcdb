#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <set>

#include "lexsig/corpus.hpp"
#include "support.hpp"

using namespace lexsig;

namespace {

Corpus make(std::vector<TokenSeq> utts) { return Corpus(std::move(utts), "test"); }

// Corpus with exactly `n` distinct contexts before "dog" (plus distractors).
Corpus dog_corpus(std::size_t n) {
    std::vector<TokenSeq> utts;
    for (std::size_t i = 0; i < n; ++i) {
        utts.push_back({"w" + std::to_string(i % 17), "v" + std::to_string(i / 17), "dog", "ran"});
        utts.push_back({"dog", "w" + std::to_string(i)});
    }
    return make(utts);
}

bool follows(const Corpus& c, const TokenSeq& ctx, const std::string& word, std::size_t max_len) {
    for (const auto& u : c.utterances())
        for (std::size_t i = 0; i < u.size(); ++i)
            if (u[i] == word && context_before(u, i, max_len) == ctx) return true;
    return false;
}

}  // namespace

TEST_CASE("corpus invariants") {
    auto c = make({{"a", "b", "a"}, {"c"}});
    CHECK(c.inventory() == std::set<Token>{"a", "b", "c"});
    CHECK(c.total_tokens() == 4);
    CHECK(testing::error_of([] { make({{"a"}, {}}); }).has_value());
}

TEST_CASE("read text and jsonl") {
    testing::TempDir dir("corpus");
    testing::write(dir / "c.txt", "the cat\n\n  sat down \n");
    auto t = Corpus::load(dir / "c.txt");
    REQUIRE(t.utterances().size() == 2);
    CHECK(t.utterances()[1] == TokenSeq{"sat", "down"});
    testing::write(dir / "c.jsonl", "{\"tokens\": [\"a\", \"b\"]}\n{\"tokens\": [\"c\"]}\n");
    auto j = Corpus::load(dir / "c.jsonl");
    CHECK(j.utterances() == std::vector<TokenSeq>{{"a", "b"}, {"c"}});
    testing::write(dir / "bad.jsonl", "{\"tokens\": [\"a\"]}\n{\"tok\": 1}\n");
    try {
        Corpus::load(dir / "bad.jsonl");
        FAIL("expected error");
    } catch (const FormatError& e) {
        CHECK(e.line() == 2);
    }
}

TEST_CASE("count_frequencies") {
    auto counts = count_frequencies(make({{"a", "b", "a"}}));
    CHECK(counts == FrequencyTable{{"a", 2}, {"b", 1}});
    CHECK(count_frequencies(Corpus{}).empty());

    auto c = make({{"x", "y"}, {"y", "y", "z"}, {"x"}});
    std::map<std::string, std::size_t> tally;
    std::size_t total = 0;
    for (const auto& u : c.utterances())
        for (const auto& t : u) {
            tally[t] += 1;
            ++total;
        }
    CHECK(count_frequencies(c) == tally);
    CHECK(total == c.total_tokens());
}

TEST_CASE("positive sampling") {
    auto c = make({{"the", "cat", "sat"}});
    auto s = sample_positive_contexts(c, "cat", 5, 64, 1);
    REQUIRE(s.contexts.size() == 1);
    CHECK(s.contexts[0].context == TokenSeq{"the"});
    CHECK(s.contexts[0].count == 1);
    CHECK(s.insufficient_types);
    CHECK(testing::error_of([&] { sample_positive_contexts(c, "dog", 5, 64, 1); }) == ErrorCode::word_absent);
    CHECK(testing::error_of([&] { sample_positive_contexts(c, "cat", 0, 64, 1); }) == ErrorCode::usage);
    CHECK(testing::error_of([&] { sample_positive_contexts(c, "cat", 5, 0, 1); }) == ErrorCode::usage);
}

TEST_CASE("250 contexts before dog, sample of 100") {
    auto c = dog_corpus(250);
    CHECK(positive_context_types(c, "dog", 64).size() == 251);  // the empty context too
    auto s = sample_positive_contexts(c, "dog", 100, 64, 42);
    CHECK(s.contexts.size() == 100);
    CHECK_FALSE(s.insufficient_types);
    std::set<TokenSeq> distinct;
    for (const auto& e : s.contexts) {
        distinct.insert(e.context);
        CHECK(follows(c, e.context, "dog", 64));
    }
    CHECK(distinct.size() == 100);
    CHECK(s == sample_positive_contexts(c, "dog", 100, 64, 42));
}

TEST_CASE("context truncation") {
    auto c = make({{"a", "b", "c", "d", "w"}});
    auto s = sample_positive_contexts(c, "w", 3, 2, 0);
    CHECK(s.contexts[0].context == TokenSeq{"c", "d"});
}

TEST_CASE("negative sampling") {
    auto c = make({{"the", "cat", "sat"}});
    auto s = sample_negative_contexts(c, "cat", 10, 64, 3);
    std::set<TokenSeq> got;
    for (const auto& e : s.contexts) got.insert(e.context);
    CHECK(got == std::set<TokenSeq>{{}, {"the", "cat"}});

    // absent word: every non-final position qualifies
    auto all = negative_context_types(c, "x", 64);
    CHECK(all.size() == 3);

    // prefix rule
    auto p = make({{"a", "cat"}, {"b", "dog"}});
    auto neg = negative_context_types(p, "ca", 64);
    CHECK(neg.count(TokenSeq{"a"}) == 0);
    CHECK(neg.count(TokenSeq{"b"}) == 1);
    CHECK(blocks_negative("cat", "ca"));
    CHECK(blocks_negative("ca", "ca"));
    CHECK_FALSE(blocks_negative("c", "ca"));
}

TEST_CASE("positive and negative positions partition the token positions") {
    auto c = make({{"a", "b", "a", "ab"}, {"b", "b"}, {"ab", "a", "c"}});
    std::size_t positions = c.total_tokens();
    for (const std::string w : {"a", "b", "ab", "c", "zz"}) {
        std::size_t pos = 0, neg = 0;
        for (const auto& [ctx, n] : positive_context_types(c, w, 64)) pos += n;
        for (const auto& [ctx, n] : negative_context_types(c, w, 64)) neg += n;
        // positions blocked only by the prefix rule belong to neither set
        std::size_t prefix_only = 0;
        for (const auto& u : c.utterances())
            for (const auto& t : u)
                if (t != w && blocks_negative(t, w)) ++prefix_only;
        CHECK(pos + neg + prefix_only == positions);
    }
}

TEST_CASE("a context may be both positive and negative") {
    auto c = make({{"x", "w"}, {"x", "y"}});
    auto pos = positive_context_types(c, "w", 64);
    auto neg = negative_context_types(c, "w", 64);
    CHECK(pos.count(TokenSeq{"x"}) == 1);
    CHECK(neg.count(TokenSeq{"x"}) == 1);
}

TEST_CASE("marginal sampling") {
    auto c = make({{"a", "b"}});
    auto s = sample_marginal_contexts(c, 10, 64, 0);
    std::set<TokenSeq> got;
    for (const auto& e : s.contexts) got.insert(e.context);
    CHECK(got == std::set<TokenSeq>{{}, {"a"}, {"a", "b"}});
    CHECK(s.word.empty());
    CHECK(s.insufficient_types);

    std::vector<TokenSeq> utts;
    for (int i = 0; i < 100; ++i)
        utts.push_back({"t" + std::to_string(i % 13), "u" + std::to_string(i % 7), "v" + std::to_string(i), "z",
                        "q", "r", "s", "p", "o", "n"});
    auto big = make(utts);
    CHECK(big.total_tokens() == 1000);
    auto m1 = sample_marginal_contexts(big, 100, 64, 9);
    CHECK(m1.contexts.size() == 100);
    CHECK(m1 == sample_marginal_contexts(big, 100, 64, 9));
}

TEST_CASE("mlu") {
    auto c = make({{"a", "b", "c", "d", "e", "f", "w"}, {"x"}});
    CHECK(compute_mlu(c, "w") == doctest::Approx(7.0));
    auto d = make({{"w", "b", "c"}, {"a", "w", "w", "d", "e"}, {"z"}});
    CHECK(compute_mlu(d, "w") == doctest::Approx(4.0));
    CHECK(testing::error_of([&] { compute_mlu(d, "nope"); }) == ErrorCode::word_absent);

    // filter-and-average oracle
    auto e = dog_corpus(30);
    double total = 0;
    int n = 0;
    for (const auto& u : e.utterances())
        if (std::find(u.begin(), u.end(), "ran") != u.end()) {
            total += static_cast<double>(u.size());
            ++n;
        }
    CHECK(compute_mlu(e, "ran") == doctest::Approx(total / n));
}

TEST_CASE("filter_vocabulary boundary") {
    auto c99 = dog_corpus(98);   // 99 types with the empty context
    auto c100 = dog_corpus(99);  // 100 types
    CHECK(positive_context_types(c99, "dog", 64).size() == 99);
    auto f = filter_vocabulary({"dog"}, c99, 100, 64);
    CHECK(f.retained.empty());
    REQUIRE(f.excluded.size() == 1);
    CHECK(f.excluded[0].second == 99);
    CHECK(filter_vocabulary({"dog"}, c100, 100, 64).retained == std::vector<Token>{"dog"});

    // exhaustive-enumeration oracle on a mixed vocabulary
    auto c = dog_corpus(40);
    std::vector<Token> words{"dog", "ran", "w3", "v1", "absent"};
    auto got = filter_vocabulary(words, c, 3, 64);
    std::vector<Token> expect;
    for (const auto& w : words) {
        std::set<TokenSeq> types;
        for (const auto& u : c.utterances())
            for (std::size_t i = 0; i < u.size(); ++i)
                if (u[i] == w) types.insert(TokenSeq(u.begin(), u.begin() + static_cast<long>(i)));
        if (types.size() >= 3) expect.push_back(w);
    }
    CHECK(got.retained == expect);
    CHECK(got.retained.size() + got.excluded.size() == words.size());
}

TEST_CASE("word features") {
    auto c = make({{"el", "niño", "niño"}, {"el"}});
    auto freqs = count_frequencies(c);
    auto f = corpus_features(c, freqs, "niño");
    CHECK(f.count == 2);
    CHECK(f.log_frequency == doctest::Approx(std::log(2.0)));
    CHECK(f.n_chars == 4);
    CHECK(f.mlu == doctest::Approx(3.0));
    auto g = corpus_features(c, freqs, "absent");
    CHECK(std::isinf(g.log_frequency));
    CHECK_FALSE(g.mlu);
    CHECK(utf8_length("日本") == 2);
}

TEST_CASE("categories") {
    CHECK(parse_category("nouns") == LexicalCategory::noun);
    CHECK(parse_category("verb") == LexicalCategory::predicate);
    CHECK(parse_category("adjectives") == LexicalCategory::predicate);
    CHECK(parse_category("function words") == LexicalCategory::function_word);
    CHECK(parse_category("other") == LexicalCategory::other);
    CHECK_FALSE(parse_category("gibberish"));
}

TEST_CASE("context sample jsonl round trip") {
    testing::TempDir dir("samples");
    auto c = dog_corpus(20);
    auto pos = sample_positive_contexts(c, "dog", 10, 64, 1);
    auto neg = sample_negative_contexts(c, "dog", 10, 64, 1);
    const auto path = dir / "s.jsonl";
    {
        std::ofstream out(path);
        write_context_sample(out, pos);
        write_context_sample(out, neg);
    }
    auto back = read_context_samples(path);
    REQUIRE(back.size() == 2);
    CHECK(back[0].contexts == pos.contexts);
    CHECK(back[1].contexts == neg.contexts);
    CHECK(back[1].polarity == Polarity::negative);
}
