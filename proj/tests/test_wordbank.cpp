#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <random>
#include <sstream>

#include "lexsig/io.hpp"
#include "lexsig/wordbank.hpp"
#include "support.hpp"

using namespace lexsig;

namespace {

std::vector<MonthProportion> random_curve(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::uniform_int_distribution<int> gap(1, 3);
    std::vector<MonthProportion> pts;
    int month = 8 + gap(rng);
    for (int i = 0; i < 12; ++i) {
        pts.push_back({month, std::round(u(rng) * 1000) / 1000});
        month += gap(rng);
    }
    return pts;
}

}  // namespace

TEST_CASE("crossing fixtures") {
    const std::vector<MonthProportion> pts{{22, 0.1}, {24, 0.4}, {25, 0.6}, {26, 0.8}};
    CHECK(child_aoa(pts) == 24.5);
    CHECK(child_aoa(pts, 0.5, false) == 25.0);
    const std::vector<MonthProportion> exact{{18, 0.3}, {20, 0.5}, {22, 0.7}};
    CHECK(child_aoa(exact, 0.5, true) == 20.0);
    CHECK(child_aoa(exact, 0.5, false) == 20.0);
    const std::vector<MonthProportion> early{{16, 0.55}, {18, 0.7}};
    CHECK(child_aoa(early) == 16.0);
    const std::vector<MonthProportion> never{{16, 0.1}, {30, 0.49}};
    CHECK(testing::error_of([&] { child_aoa(never); }) == ErrorCode::never_acquired);

    ProportionTable t;
    t.words["dog"] = {"nouns", LexicalCategory::noun, pts};
    CHECK(child_aoa(t, "dog") == 24.5);
    CHECK(testing::error_of([&] { child_aoa(t, "cat"); }) == ErrorCode::word_absent);
}

TEST_CASE("higher thresholds never give earlier AoA") {
    std::mt19937_64 rng(21);
    for (int i = 0; i < 1000; ++i) {
        const auto pts = random_curve(rng);
        for (bool interp : {true, false}) {
            double prev = -1;
            for (double th = 0.05; th <= 0.951; th += 0.05) {
                double a;
                try {
                    a = child_aoa(pts, th, interp);
                } catch (const Error&) {
                    // once never reached, every higher threshold is never reached too
                    for (double h = th; h <= 0.951; h += 0.05)
                        CHECK(testing::error_of([&] { child_aoa(pts, h, interp); }) == ErrorCode::never_acquired);
                    break;
                }
                CHECK(a >= prev);
                prev = a;
            }
        }
    }
}

TEST_CASE("interpolated AoA lies between the straddling months") {
    std::mt19937_64 rng(22);
    for (int i = 0; i < 500; ++i) {
        const auto pts = random_curve(rng);
        try {
            const double a = child_aoa(pts, 0.5, true);
            const double b = child_aoa(pts, 0.5, false);
            CHECK(a <= b);
            std::size_t k = 0;
            while (pts[k].month != static_cast<int>(b)) ++k;
            if (k > 0) CHECK(a >= pts[k - 1].month);
        } catch (const Error&) {
        }
    }
}

TEST_CASE("load, exclude and round trip") {
    testing::TempDir dir("wb");
    testing::write(dir / "wb.csv",
                   "word,category,month,proportion\n"
                   "dog,nouns,16,0.2\ndog,nouns,18,0.6\n"
                   "run,verbs,16,0.1\nrun,verbs,18,0.3\nrun,verbs,20,0.55\n"
                   "doctor,nouns,16,0.1\ndoctor,nouns,18,0.7\n");
    testing::write(dir / "ex.txt", "# misannotated\ndoctor\n  nowhere  \n");
    auto load = load_wordbank(dir / "wb.csv", dir / "ex.txt");
    CHECK(load.table.words.size() == 2);
    CHECK(load.excluded == std::vector<std::string>{"doctor"});
    CHECK(load.table.words.at("run").lexical_category == LexicalCategory::predicate);
    CHECK(load.table.categories().at("dog") == LexicalCategory::noun);
    CHECK(read_word_list(dir / "ex.txt") == std::vector<std::string>{"doctor", "nowhere"});

    auto plain = load_wordbank(dir / "wb.csv");
    CHECK(plain.table.words.size() == 3);
    std::ostringstream out;
    write_wordbank(out, plain.table);
    testing::write(dir / "again.csv", out.str());
    auto back = parse_wordbank(dir / "again.csv");
    REQUIRE(back.words.size() == 3);
    for (const auto& [w, e] : plain.table.words) {
        const auto& f = back.words.at(w);
        CHECK(f.category == e.category);
        CHECK(f.lexical_category == e.lexical_category);
        REQUIRE(f.points.size() == e.points.size());
        for (std::size_t i = 0; i < f.points.size(); ++i) {
            CHECK(f.points[i].month == e.points[i].month);
            CHECK(f.points[i].proportion == e.points[i].proportion);
        }
    }
    std::ostringstream again;
    write_wordbank(again, back);
    CHECK(again.str() == out.str());

    std::vector<std::string> never;
    auto all = child_aoa_all(plain.table, 0.5, true, &never);
    CHECK(all.size() == 3);
    CHECK(never.empty());
    auto strict = child_aoa_all(plain.table, 0.65, false, &never);
    CHECK(strict.size() == 1);
    CHECK(never.size() == 2);
}

TEST_CASE("format errors name the line") {
    testing::TempDir dir("wbbad");
    auto expect_line = [&](const std::string& body, std::size_t line) {
        testing::write(dir / "b.csv", "word,category,month,proportion\n" + body);
        try {
            parse_wordbank(dir / "b.csv");
            FAIL("expected a format error");
        } catch (const FormatError& e) {
            CHECK(e.line() == line);
        }
    };
    expect_line("dog,nouns,16,1.2\n", 2);
    expect_line("dog,nouns,16,0.2\ndog,nouns,16,0.3\n", 3);
    expect_line("dog,nouns,16,0.2\ndog,verbs,18,0.3\n", 3);
    expect_line("dog,nouns,x,0.2\n", 2);
    testing::write(dir / "h.csv", "word,month\ndog,1\n");
    CHECK(testing::error_of([&] { parse_wordbank(dir / "h.csv"); }) == ErrorCode::format);
}

TEST_CASE("fixture shaped like the child norms: 305 words, 262 after exclusions") {
    testing::TempDir dir("wb305");
    std::string csv = "word,category,month,proportion\n", ex;
    const char* cats[] = {"nouns", "predicates", "function_words", "other"};
    for (int i = 0; i < 305; ++i) {
        const std::string w = "word" + std::to_string(i);
        for (int m = 16; m <= 30; m += 2)
            csv += w + "," + cats[i % 4] + "," + std::to_string(m) + "," + format_double((m - 14) / 16.0) + "\n";
        if (i % 7 == 3 && i < 300) ex += w + "\n";
    }
    testing::write(dir / "wb.csv", csv);
    testing::write(dir / "ex.txt", ex);
    auto load = load_wordbank(dir / "wb.csv", dir / "ex.txt");
    CHECK(load.excluded.size() == 43);
    CHECK(load.table.words.size() == 262);
    CHECK(child_aoa_all(load.table, 0.5, true).size() == 262);
}
