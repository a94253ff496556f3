#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <random>

#include "uwbcoop/measurement.hpp"

using namespace uwbcoop;

namespace {

AnchorSet square_anchors() {
    AnchorSet a;
    a.positions = {{0, 0}, {10, 0}, {10, 10}, {0, 10}};
    a.reference_index = 0;
    return a;
}

AnchorSet five_anchors() {
    AnchorSet a;
    a.positions = {{0, 0}, {10, 0}, {10, 10}, {0, 10}, {5, 0}};
    a.reference_index = 0;
    return a;
}

}  // namespace

TEST_CASE("synth_toas") {
    std::mt19937_64 rng(1);
    const AnchorSet anchors = square_anchors();
    SUBCASE("noiseless gives exact flight times") {
        const Point2 tag{3.0, 4.0};
        auto toas = synth_toas(tag, anchors, 0.0, rng);
        REQUIRE(toas.size() == 4);
        for (int i = 0; i < 4; ++i) {
            CHECK(toas[i] == distance(tag, anchors.positions[i]) / kSpeedOfLight);
        }
    }
    SUBCASE("center of a square: all TOAs equal") {
        auto toas = synth_toas({5, 5}, anchors, 0.0, rng);
        for (int i = 1; i < 4; ++i) CHECK(toas[i] == doctest::Approx(toas[0]).epsilon(1e-15));
    }
    SUBCASE("empirical std matches sigma within 3%") {
        const double sigma = 1e-9;
        const Point2 tag{2, 7};
        const double mean_true = distance(tag, anchors.positions[0]) / kSpeedOfLight;
        double sum = 0, sumsq = 0;
        const int n = 100000;
        for (int i = 0; i < n; ++i) {
            const double d = synth_toas(tag, anchors, sigma, rng)[0] - mean_true;
            sum += d;
            sumsq += d * d;
        }
        const double var = sumsq / n - (sum / n) * (sum / n);
        CHECK(std::sqrt(var) == doctest::Approx(sigma).epsilon(0.03));
    }
}

TEST_CASE("form_tdoa") {
    SUBCASE("all TOAs equal gives zero TDOAs") {
        auto tdoa = form_tdoa({1e-8, 1e-8, 1e-8, 1e-8}, 0);
        REQUIRE(tdoa.size() == 3);
        for (const auto& e : tdoa) CHECK(e.value_m == 0.0);
    }
    SUBCASE("one nanosecond is 0.299792458 m") {
        auto tdoa = form_tdoa({0.0, 1e-9}, 0);
        CHECK(tdoa[0].value_m == doctest::Approx(0.299792458).epsilon(1e-12));
        CHECK(tdoa[0].anchor_index == 1);
    }
    SUBCASE("reference anchor is skipped, indices preserved") {
        auto tdoa = form_tdoa({1e-9, 2e-9, 3e-9}, 1);
        REQUIRE(tdoa.size() == 2);
        CHECK(tdoa[0].anchor_index == 0);
        CHECK(tdoa[1].anchor_index == 2);
    }
    SUBCASE("noiseless TDOA equals true_range_difference per anchor") {
        std::mt19937_64 rng(2);
        const AnchorSet anchors = five_anchors();
        const Point2 tag{3.3, 6.1};
        auto tdoa = form_tdoa(synth_toas(tag, anchors, 0.0, rng), anchors.reference_index);
        REQUIRE(tdoa.size() == 4);
        for (const auto& e : tdoa) {
            const double expect = true_range_difference(
                tag, anchors.positions[e.anchor_index], anchors.reference());
            CHECK(e.value_m == doctest::Approx(expect).epsilon(1e-9));
        }
    }
    SUBCASE("noisy TDOA variance carries the common reference term") {
        std::mt19937_64 rng(3);
        const AnchorSet anchors = square_anchors();
        const double sigma = 1e-9;
        const Point2 tag{4, 6};
        const int n = 100000;
        std::vector<double> v1, v2;
        v1.reserve(n);
        v2.reserve(n);
        for (int i = 0; i < n; ++i) {
            auto tdoa = form_tdoa(synth_toas(tag, anchors, sigma, rng), 0);
            v1.push_back(tdoa[0].value_m);
            v2.push_back(tdoa[1].value_m);
        }
        auto mean = [&](const std::vector<double>& v) {
            double s = 0;
            for (double x : v) s += x;
            return s / v.size();
        };
        const double m1 = mean(v1), m2 = mean(v2);
        double var = 0, cov = 0;
        for (int i = 0; i < n; ++i) {
            var += (v1[i] - m1) * (v1[i] - m1);
            cov += (v1[i] - m1) * (v2[i] - m2);
        }
        var /= n;
        cov /= n;
        const double cs2 = kSpeedOfLight * sigma * kSpeedOfLight * sigma;
        CHECK(var == doctest::Approx(2 * cs2).epsilon(0.05));
        CHECK(cov == doctest::Approx(cs2).epsilon(0.10));
    }
}

TEST_CASE("synth_ranges") {
    std::mt19937_64 rng(4);
    SUBCASE("noiseless gives exact distances, co-located peer gives zero") {
        auto r = synth_ranges({0, 0}, {{3, 4}, {0, 0}}, 0.0, rng);
        CHECK(r[0] == 5.0);
        CHECK(r[1] == 0.0);
    }
    SUBCASE("empirical std is 6 cm within 3%") {
        const double sigma = 0.06;
        double sum = 0, sumsq = 0;
        const int n = 100000;
        for (int i = 0; i < n; ++i) {
            const double d = synth_ranges({0, 0}, {{3, 4}}, sigma, rng)[0] - 5.0;
            sum += d;
            sumsq += d * d;
        }
        const double var = sumsq / n - (sum / n) * (sum / n);
        CHECK(std::sqrt(var) == doctest::Approx(sigma).epsilon(0.03));
    }
}

TEST_CASE("h_eval") {
    const AnchorSet anchors = five_anchors();
    SUBCASE("perpendicular bisector entry is zero") {
        // (5,5) is equidistant from anchors 0 and 1.
        Eigen::Vector4d x(5, 5, 0, 0);
        auto h = h_eval(x, anchors, {1}, {});
        CHECK(h(0) == doctest::Approx(0.0).epsilon(1e-12));
    }
    SUBCASE("no peers: TDOA entries only") {
        Eigen::Vector4d x(3, 4, 0, 0);
        CHECK(h_eval(x, anchors, {1, 2, 3, 4}, {}).size() == 4);
    }
    SUBCASE("entries match per-entry recomputation from distance()") {
        std::mt19937_64 rng(5);
        std::uniform_real_distribution<double> u(0.5, 9.5);
        for (int rep = 0; rep < 100; ++rep) {
            Eigen::Vector4d x(u(rng), u(rng), 0, 0);
            const Point2 p{x(0), x(1)};
            std::vector<Point2> peers{{u(rng), u(rng)}, {u(rng), u(rng)}};
            auto h = h_eval(x, anchors, {1, 2, 3, 4}, peers);
            REQUIRE(h.size() == 6);
            for (int i = 0; i < 4; ++i) {
                const double expect = distance(p, anchors.positions[i + 1]) -
                                      distance(p, anchors.positions[0]);
                CHECK(h(i) == doctest::Approx(expect).epsilon(1e-12));
            }
            CHECK(h(4) == doctest::Approx(distance(p, peers[0])).epsilon(1e-12));
            CHECK(h(5) == doctest::Approx(distance(p, peers[1])).epsilon(1e-12));
        }
    }
    SUBCASE("ordering invariance under anchor permutation") {
        Eigen::Vector4d x(2.2, 7.7, 0, 0);
        std::vector<int> order{1, 2, 3, 4};
        auto base = h_eval(x, anchors, order, {});
        std::vector<int> perm{4, 2, 1, 3};
        auto shuffled = h_eval(x, anchors, perm, {});
        for (int i = 0; i < 4; ++i) {
            const auto it = std::find(order.begin(), order.end(), perm[i]);
            CHECK(shuffled(i) == base(it - order.begin()));
        }
    }
}

TEST_CASE("h_jacobian") {
    const AnchorSet anchors = five_anchors();
    SUBCASE("finite differences match within 1e-5 relative") {
        std::mt19937_64 rng(6);
        std::uniform_real_distribution<double> u(0.5, 9.5);
        const double step = 1e-6;
        for (int rep = 0; rep < 100; ++rep) {
            Eigen::Vector4d x(u(rng), u(rng), u(rng) - 5, u(rng) - 5);
            std::vector<Point2> peers{{u(rng), u(rng)}};
            auto H = h_jacobian(x, anchors, {1, 2, 3, 4}, peers);
            for (int col = 0; col < 2; ++col) {
                Eigen::Vector4d xp = x, xm = x;
                xp(col) += step;
                xm(col) -= step;
                Eigen::VectorXd fd = (h_eval(xp, anchors, {1, 2, 3, 4}, peers) -
                                      h_eval(xm, anchors, {1, 2, 3, 4}, peers)) /
                                     (2 * step);
                for (int row = 0; row < H.rows(); ++row) {
                    CHECK(H(row, col) ==
                          doctest::Approx(fd(row)).epsilon(1e-5).scale(1.0));
                }
            }
        }
    }
    SUBCASE("velocity columns are zero") {
        Eigen::Vector4d x(3, 4, 1.5, -2.5);
        auto H = h_jacobian(x, anchors, {1, 2}, {{7, 7}});
        CHECK(H.col(2).norm() == 0.0);
        CHECK(H.col(3).norm() == 0.0);
    }
    SUBCASE("row against the reference anchor itself is zero") {
        Eigen::Vector4d x(3, 4, 0, 0);
        auto H = h_jacobian(x, anchors, {0}, {});
        CHECK(H.row(0).norm() == 0.0);
    }
}

TEST_CASE("build_noise_covariance") {
    SUBCASE("frozen TDOA block for sigma_toa = 1 ns") {
        // c * 1 ns = 0.299792458 m; (c s)^2 = 0.0898755178736818 m^2.
        MeasurementNoiseSpec spec{1e-9, 0.06, true};
        auto R = build_noise_covariance(spec, 2, 0);
        CHECK(R(0, 0) == doctest::Approx(0.1797510357473636).epsilon(1e-12));
        CHECK(R(1, 1) == doctest::Approx(0.1797510357473636).epsilon(1e-12));
        CHECK(R(0, 1) == doctest::Approx(0.0898755178736818).epsilon(1e-12));
        CHECK(R(1, 0) == R(0, 1));
    }
    SUBCASE("range block is sigma_twr squared") {
        MeasurementNoiseSpec spec{1e-9, 0.06, true};
        auto R = build_noise_covariance(spec, 0, 1);
        CHECK(R(0, 0) == doctest::Approx(0.0036).epsilon(1e-12));
    }
    SUBCASE("uncorrelated flag zeroes the off-diagonals") {
        MeasurementNoiseSpec spec{1e-9, 0.06, false};
        auto R = build_noise_covariance(spec, 3, 0);
        CHECK(R(0, 1) == 0.0);
        CHECK(R(1, 2) == 0.0);
    }
    SUBCASE("symmetric positive definite, including the zero-sigma floor") {
        for (const auto& spec : {MeasurementNoiseSpec{1e-9, 0.06, true},
                                 MeasurementNoiseSpec{0.0, 0.0, true}}) {
            auto R = build_noise_covariance(spec, 4, 2);
            CHECK((R - R.transpose()).norm() == 0.0);
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(R);
            CHECK(es.eigenvalues().minCoeff() > 0.0);
        }
    }
}
