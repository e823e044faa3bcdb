#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <random>

#include "lexsig/trajectory.hpp"
#include "support.hpp"

using namespace lexsig;

namespace {

Trajectory traj(std::vector<double> vals, std::string word = "w", std::int64_t seed = 1,
                SignatureKind kind = {Family::truth, SignaturePolarity::positive}) {
    Trajectory t;
    t.word = std::move(word);
    t.kind = kind;
    t.seed = seed;
    for (std::size_t i = 0; i < vals.size(); ++i) t.points.push_back({static_cast<std::int64_t>(10 * (i + 1)), vals[i]});
    t.total_steps = t.points.empty() ? 0 : t.points.back().step;
    return t;
}

// Quadratic definition: smallest t whose tail (>= min_tail points) has every
// pairwise gap below epsilon.
std::optional<std::size_t> brute_force(const std::vector<double>& v, double eps, std::size_t min_tail) {
    for (std::size_t t = 0; t < v.size(); ++t) {
        if (v.size() - t < min_tail) break;
        bool ok = true;
        for (std::size_t s = t; s < v.size() && ok; ++s)
            for (std::size_t u = t; u < v.size() && ok; ++u) ok = std::abs(v[s] - v[u]) < eps;
        if (ok) return t;
    }
    return std::nullopt;
}

std::vector<double> random_walk(std::mt19937_64& rng, std::size_t n) {
    std::normal_distribution<double> step(0.0, 0.1);
    std::uniform_real_distribution<double> decay(0.5, 0.95);
    std::vector<double> v(n);
    double x = 3.0, scale = 1.0;
    const double d = decay(rng);
    for (auto& e : v) {
        x += scale * step(rng);
        scale *= d;
        e = x;
    }
    return v;
}

}  // namespace

TEST_CASE("moving average") {
    auto s = smooth_moving_average(traj({0, 3, 0}), 3);
    CHECK(s.values() == std::vector<double>{1.5, 1.0, 1.5});
    auto c = smooth_moving_average(traj({2, 2, 2, 2, 2}), 5);
    CHECK(c.values() == std::vector<double>{2, 2, 2, 2, 2});
    CHECK(smooth_moving_average(traj({1, 5, 2}), 1).values() == std::vector<double>{1, 5, 2});
    CHECK(testing::error_of([] { smooth_moving_average(traj({1, 2}), 3); }) == ErrorCode::window_too_large);
    CHECK(testing::error_of([] { smooth_moving_average(traj({1, 2, 3}), 2); }) == ErrorCode::usage);
}

TEST_CASE("smoothing never widens the global spread") {
    std::mt19937_64 rng(2);
    for (int i = 0; i < 200; ++i) {
        auto t = traj(random_walk(rng, 20));
        for (std::size_t w : {1u, 3u, 5u, 7u}) {
            auto v = smooth_moving_average(t, w).values();
            CHECK(max_spread(v) <= max_spread(t.values()) + 1e-12);
        }
    }
}

TEST_CASE("cauchy hand examples") {
    auto r = extract_aoa_cauchy(traj({5, 4, 3, 2, 1, 1, 1, 1}), 0.07);
    REQUIRE(r.converged);
    CHECK(r.aoa_step == 50);
    CHECK(*r.aoa_normalized == 4.0 / 7.0);

    auto c = extract_aoa_cauchy(traj({0.3, 0.3, 0.3}), 0.07);
    CHECK(c.converged);
    CHECK(*c.aoa_normalized == 0.0);

    auto alt = extract_aoa_cauchy(traj({0, 1, 0, 1, 0, 1, 0, 1}), 0.5);
    CHECK_FALSE(alt.converged);
    CHECK_FALSE(alt.aoa_step);

    // the last point alone never counts as converged
    CHECK_FALSE(cauchy_index(std::vector<double>{0, 1, 0, 1}, 0.5, 2));
    CHECK(cauchy_index(std::vector<double>{0, 1, 0, 1}, 0.5, 1) == 3u);
    CHECK(testing::error_of([] { extract_aoa_cauchy(traj({1, 2}), 0.0); }) == ErrorCode::usage);
    CHECK(testing::error_of([] { extract_aoa_cauchy(traj({1}), 0.1); }) == ErrorCode::insufficient_data);
}

TEST_CASE("linear scan equals the quadratic definition") {
    std::mt19937_64 rng(7);
    std::uniform_int_distribution<int> len(2, 30);
    std::uniform_real_distribution<double> eps(0.005, 0.3);
    for (int i = 0; i < 1000; ++i) {
        auto v = random_walk(rng, static_cast<std::size_t>(len(rng)));
        const double e = eps(rng);
        for (std::size_t tail : {1u, 2u, 3u}) CHECK(cauchy_index(v, e, tail) == brute_force(v, e, tail));
    }
}

TEST_CASE("larger epsilon converges no later") {
    std::mt19937_64 rng(8);
    for (int i = 0; i < 500; ++i) {
        auto t = traj(random_walk(rng, 16));
        for (double e1 : {0.01, 0.03, 0.07})
            for (double e2 : {0.07, 0.1, 0.5}) {
                if (e2 <= e1) continue;
                auto a = extract_aoa_cauchy(t, e1), b = extract_aoa_cauchy(t, e2);
                if (a.converged) {
                    REQUIRE(b.converged);
                    CHECK(*b.aoa_step <= *a.aoa_step);
                }
            }
    }
}

TEST_CASE("truncating before the AoA keeps the tail condition") {
    std::mt19937_64 rng(9);
    for (int i = 0; i < 200; ++i) {
        auto v = random_walk(rng, 20);
        auto idx = cauchy_index(v, 0.05, 2);
        if (!idx) continue;
        std::vector<double> tail(v.begin() + static_cast<long>(*idx), v.end());
        CHECK(cauchy_index(tail, 0.05, 2) == 0u);
    }
}

TEST_CASE("convergence sweep") {
    std::vector<Trajectory> flat{traj({1, 1, 1}, "a"), traj({2, 2, 2}, "b")};
    for (const auto& cell : convergence_sweep(flat, {0.03, 0.07}))
        CHECK(cell.fraction_non_converged == 0.0);

    std::vector<Trajectory> seeds{traj({1, 1, 1}, "a", 1), traj({1, 2, 1}, "a", 2), traj({1, 1, 1}, "a", 3),
                                  traj({4, 4, 4}, "b", 1)};
    auto cells = convergence_sweep(seeds, {0.5});
    REQUIRE(cells.size() == 1);
    CHECK(cells[0].words == 2);
    CHECK(cells[0].non_converged == 1);
    CHECK(cells[0].fraction_non_converged == 0.5);

    // per-trajectory oracle on random data
    std::mt19937_64 rng(10);
    std::vector<Trajectory> many;
    for (int w = 0; w < 40; ++w)
        for (int s = 1; s <= 3; ++s) many.push_back(traj(random_walk(rng, 12), "w" + std::to_string(w), s));
    const std::vector<double> grid{0.01, 0.03, 0.07, 0.15};
    auto got = convergence_sweep(many, grid);
    REQUIRE(got.size() == grid.size());
    for (std::size_t g = 0; g < grid.size(); ++g) {
        std::set<std::string> failed;
        for (const auto& t : many)
            if (!brute_force(t.values(), grid[g], 2)) failed.insert(t.word);
        CHECK(got[g].non_converged == failed.size());
        CHECK(got[g].words == 40);
    }
    CHECK(testing::error_of([&] { convergence_sweep(many, {0.0}); }) == ErrorCode::usage);
}

TEST_CASE("seed aggregation") {
    auto res = [](std::string w, std::int64_t seed, std::optional<double> aoa) {
        AoAResult r;
        r.word = std::move(w);
        r.seed = seed;
        r.converged = aoa.has_value();
        r.aoa_normalized = aoa;
        if (aoa) r.aoa_step = 1;
        return r;
    };
    auto agg = aggregate_seeds({res("a", 1, 0.4), res("a", 2, 0.5), res("a", 3, 0.6), res("b", 1, 0.2),
                                res("b", 2, std::nullopt)});
    REQUIRE(agg.values.size() == 1);
    CHECK(agg.values[0].word == "a");
    CHECK(agg.values[0].aoa == doctest::Approx(0.5));
    CHECK(agg.values[0].seeds == 3);
    REQUIRE(agg.excluded.size() == 1);
    CHECK(agg.excluded[0].first == "b");

    // recompute oracle
    std::mt19937_64 rng(11);
    std::vector<AoAResult> all;
    std::map<std::string, std::vector<double>> by_word;
    std::set<std::string> bad;
    for (int w = 0; w < 30; ++w)
        for (int s = 1; s <= 3; ++s) {
            auto t = traj(random_walk(rng, 10), "w" + std::to_string(w), s);
            auto r = extract_aoa_cauchy(t, 0.05);
            all.push_back(r);
            if (r.converged)
                by_word[r.word].push_back(*r.aoa_normalized);
            else
                bad.insert(r.word);
        }
    auto got = aggregate_seeds(all);
    CHECK(got.values.size() + got.excluded.size() == 30);
    for (const auto& v : got.values) {
        CHECK_FALSE(bad.count(v.word));
        const auto& xs = by_word[v.word];
        CHECK(v.aoa == doctest::Approx((xs[0] + xs[1] + xs[2]) / 3.0).epsilon(1e-14));
    }
}

TEST_CASE("epsilon-monotone shape") {
    CHECK(is_monotone(std::vector<double>{3, 2, 2, 1}));
    CHECK(is_monotone(std::vector<double>{1, 2, 3}));
    CHECK_FALSE(is_monotone(std::vector<double>{1, 2, 1}));
    CHECK(is_monotone(std::vector<double>{1, 2, 1.95}, 0.07));
    CHECK_FALSE(is_monotone(std::vector<double>{1, 2, 1.9}, 0.07));
    CHECK(is_monotone(std::vector<double>{}));
}

TEST_CASE("trajectory and aoa csv round trip") {
    testing::TempDir dir("traj");
    std::vector<Trajectory> ts{traj({0.1, 0.2, 0.30000000000000004}, "x"), traj({5, 4}, "y", 2)};
    {
        std::ofstream out(dir / "t.csv");
        write_trajectories(out, ts);
    }
    auto back = read_trajectories(dir / "t.csv");
    REQUIRE(back.size() == 2);
    CHECK(back[0].points == ts[0].points);
    CHECK(back[1].seed == 2);
    CHECK(back[1].total_steps == 20);

    std::vector<AoAResult> rs{extract_aoa_cauchy(ts[0], 0.5), extract_aoa_cauchy(traj({0, 1, 0, 1}), 0.5)};
    {
        std::ofstream out(dir / "a.csv");
        write_aoa_header(out);
        for (const auto& r : rs) write_aoa_row(out, r);
    }
    auto aback = read_aoa(dir / "a.csv");
    REQUIRE(aback.size() == 2);
    CHECK(aback[0].converged);
    CHECK(aback[0].aoa_normalized == rs[0].aoa_normalized);
    CHECK_FALSE(aback[1].converged);
    testing::write(dir / "bad.csv", "word,family,polarity,seed,epsilon,converged,aoa_step,aoa_normalized\n"
                                    "x,true,positive,1,0.1,true,,\n");
    CHECK(testing::error_of([&] { read_aoa(dir / "bad.csv"); }) == ErrorCode::format);
}

TEST_CASE("trajectory validation") {
    auto t = traj({1, 2, 3});
    t.points[1].step = 5;
    CHECK(testing::error_of([&] { t.validate(); }) == ErrorCode::format);
    auto u = traj({1, 2});
    u.total_steps = 99;
    CHECK(testing::error_of([&] { u.validate(); }) == ErrorCode::format);
}
