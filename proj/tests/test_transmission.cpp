#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "uwbcoop/transmission.hpp"

using namespace uwbcoop;

namespace {

std::vector<Point2> random_triangle(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.0, 10.0);
    for (;;) {
        std::vector<Point2> pts{{u(rng), u(rng)}, {u(rng), u(rng)}, {u(rng), u(rng)}};
        bool ok = true;
        for (int i = 0; i < 3 && ok; ++i) {
            for (int j = i + 1; j < 3; ++j) {
                if (distance(pts[i], pts[j]) < 0.1) ok = false;
            }
        }
        if (ok) return pts;
    }
}

}  // namespace

TEST_CASE("simulate_round timeline, equilateral triangle") {
    // Side 3 m, both delays 1 ms, no clock error, no jitter. Expected values
    // from writing out the Fig.-2 timeline by hand.
    const double side = 3.0;
    const double tp = side / kSpeedOfLight;
    const double d = 1e-3;
    std::vector<Point2> tags{{0, 0}, {3, 0}, {1.5, 3.0 * std::sqrt(3.0) / 2.0}};
    std::mt19937_64 rng(1);
    TimingRecord rec = simulate_round(tags, {d, d, d}, {0, 0, 0}, {}, rng);

    REQUIRE(rec.t12());
    REQUIRE(rec.t23());
    REQUIRE(rec.t13());
    REQUIRE(rec.t3w());
    CHECK(*rec.t12() == doctest::Approx(2 * tp + d).epsilon(1e-15));
    CHECK(*rec.t23() == doctest::Approx(2 * tp + d).epsilon(1e-15));
    CHECK(*rec.t13() == doctest::Approx(3 * tp + 2 * d).epsilon(1e-15));
    // t3w = tp12 + tp23 - tp13 + dt2 (equilateral: collapses to tp + dt2)
    CHECK(*rec.t3w() == doctest::Approx(tp + d).epsilon(1e-15));
}

TEST_CASE("simulate_round with zero propagation") {
    std::vector<Point2> tags{{1, 1}, {1, 1}, {1, 1}};
    std::mt19937_64 rng(2);
    TimingRecord rec = simulate_round(tags, {0.0, 2e-3, 3e-3}, {0, 0, 0}, {}, rng);
    CHECK(*rec.t12() == doctest::Approx(2e-3).epsilon(1e-15));
    CHECK(*rec.t23() == doctest::Approx(3e-3).epsilon(1e-15));
    CHECK(*rec.t3w() == doctest::Approx(2e-3).epsilon(1e-15));
}

TEST_CASE("tag failure fallback") {
    std::mt19937_64 rng(3);
    std::vector<Point2> tags{{0, 0}, {4, 0}, {0, 3}};
    const double tp13 = distance(tags[0], tags[2]) / kSpeedOfLight;

    SUBCASE("middle tag failed: direct reply from the last tag") {
        TimingRecord rec = simulate_round(tags, {1e-3, 1e-3, 2e-3}, {0, 0, 0}, {1}, rng);
        CHECK_FALSE(rec.t12());
        CHECK_FALSE(rec.t23());
        CHECK_FALSE(rec.t3w());
        REQUIRE(rec.t13());
        CHECK(*rec.t13() == doctest::Approx(2 * tp13 + 2e-3).epsilon(1e-15));

        PropagationTimes rec_tp = recover_propagation_times(rec);
        REQUIRE(rec_tp.get(0, 2));
        CHECK(*rec_tp.get(0, 2) == doctest::Approx(tp13).epsilon(1e-12));
        CHECK_FALSE(rec_tp.get(0, 1));
        CHECK_FALSE(rec_tp.get(1, 2));
    }
    SUBCASE("fallback result unaffected by the failed tag's parameters") {
        TimingRecord a = simulate_round(tags, {1e-3, 1e-3, 2e-3}, {0, 0, 0}, {1}, rng);
        TimingRecord b = simulate_round(tags, {1e-3, 9e-3, 2e-3}, {0, 5e-5, 0}, {1}, rng);
        CHECK(*recover_propagation_times(a).get(0, 2) ==
              *recover_propagation_times(b).get(0, 2));
    }
    SUBCASE("fewer than two live tags aborts") {
        CHECK_THROWS_AS(simulate_round(tags, {1e-3, 1e-3, 1e-3}, {0, 0, 0}, {1, 2}, rng),
                        std::runtime_error);
    }
}

TEST_CASE("round-trip: noiseless recovery equals true propagation times") {
    std::mt19937_64 rng(4);
    for (int rep = 0; rep < 200; ++rep) {
        auto tags = random_triangle(rng);
        TimingRecord rec = simulate_round(tags, {1e-3, 1e-3, 2e-3}, {0, 0, 0}, {}, rng);
        PropagationTimes tp = recover_propagation_times(rec);
        for (int i = 0; i < 3; ++i) {
            for (int j = i + 1; j < 3; ++j) {
                const double expect = distance(tags[i], tags[j]) / kSpeedOfLight;
                REQUIRE(tp.get(i, j));
                CHECK(std::abs(*tp.get(i, j) - expect) < 1e-12);
            }
        }
        // single-packet-per-period rule
        CHECK(rec.responders.size() == 3);
    }
}

TEST_CASE("recover from hand-built records") {
    TimingRecord rec;
    rec.n_tags = 3;
    rec.delays = {0.0, 1e-3, 2e-3};
    rec.responders = {0, 1, 2};
    rec.trigger[1] = 0;
    rec.trigger[2] = 1;

    SUBCASE("t12 equal to the delay means zero flight time") {
        rec.tx_to_rx[{0, 1}] = 1e-3;
        auto tp = recover_propagation_times(rec);
        REQUIRE(tp.get(0, 1));
        CHECK(*tp.get(0, 1) == 0.0);
    }
    SUBCASE("missing t3w leaves tp13 unavailable but tp23 available") {
        rec.tx_to_rx[{0, 2}] = 5e-3;
        rec.tx_to_rx[{1, 2}] = 3e-3;
        auto tp = recover_propagation_times(rec);
        CHECK_FALSE(tp.get(0, 2));
        REQUIRE(tp.get(1, 2));
        CHECK(*tp.get(1, 2) == doctest::Approx((3e-3 - 2e-3) / 2).epsilon(1e-15));
    }
    SUBCASE("negative recovery beyond tolerance is flagged invalid") {
        rec.tx_to_rx[{0, 1}] = 1e-3 - 1e-8;  // tp = -5e-9
        auto strict = recover_propagation_times(rec, 1e-9);
        CHECK(strict.invalid.count({0, 1}) == 1);
        CHECK_FALSE(strict.get(0, 1));
        auto loose = recover_propagation_times(rec, 1e-8);
        CHECK(loose.get(0, 1));
    }
}

TEST_CASE("clock error bias is linear in ppm with slope -delta/2") {
    std::mt19937_64 rng(5);
    std::vector<Point2> tags{{0, 0}, {5, 0}, {2, 4}};
    const double delta = 2e-3;
    const double tp_true = distance(tags[0], tags[1]) / kSpeedOfLight;

    // tp12 error for tag-2 clock offset e: delay runs short by e*delta
    // (to first order), halved by the two-way split.
    for (double e : {1e-6, 2e-6, 4e-6}) {
        TimingRecord rec = simulate_round(tags, {1e-3, delta, 1e-3}, {0.0, e, 0.0}, {}, rng);
        auto tp = recover_propagation_times(rec);
        const double err = *tp.get(0, 1) - tp_true;
        const double analytic = -e * delta / 2.0;
        CHECK(err == doctest::Approx(analytic).epsilon(0.01));
    }
}

TEST_CASE("chain_schedule") {
    SUBCASE("n=3 reproduces the three-tag scheme") {
        ChainPlan p = chain_schedule(3);
        CHECK(p.tx_rx_targets[0] == std::vector<int>{1, 2});  // t12, t13
        CHECK(p.tx_rx_targets[1] == std::vector<int>{2});     // t23
        CHECK(p.tx_rx_targets[2].empty());
        CHECK(p.wait_targets[2] == std::vector<int>{0});      // t3w
        CHECK(p.wait_targets[0].empty());
        CHECK(p.wait_targets[1].empty());
    }
    SUBCASE("n=2 degenerates to single-sided TWR") {
        ChainPlan p = chain_schedule(2);
        CHECK(p.tx_rx_targets[0] == std::vector<int>{1});
        CHECK(p.wait_targets[1].empty());
    }
    SUBCASE("n=4 plan recovers all six pairs") {
        std::mt19937_64 rng(6);
        std::uniform_real_distribution<double> u(0.0, 10.0);
        for (int rep = 0; rep < 50; ++rep) {
            std::vector<Point2> tags{{u(rng), u(rng)}, {u(rng), u(rng)},
                                     {u(rng), u(rng)}, {u(rng), u(rng)}};
            TimingRecord rec =
                simulate_round(tags, {1e-3, 1e-3, 2e-3, 3e-3}, {0, 0, 0, 0}, {}, rng);
            auto tp = recover_propagation_times(rec);
            for (int i = 0; i < 4; ++i) {
                for (int j = i + 1; j < 4; ++j) {
                    const double expect = distance(tags[i], tags[j]) / kSpeedOfLight;
                    REQUIRE(tp.get(i, j));
                    CHECK(std::abs(*tp.get(i, j) - expect) < 1e-12);
                }
            }
        }
    }
    SUBCASE("every pair is covered by the plan") {
        for (int n = 2; n <= 6; ++n) {
            ChainPlan p = chain_schedule(n);
            int covered = 0;
            for (int k = 0; k < n; ++k) covered += static_cast<int>(p.tx_rx_targets[k].size());
            CHECK(covered == n * (n - 1) / 2);
        }
    }
}
