#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "oracles.hpp"
#include "qdmeta/feature_map.hpp"
#include "qdmeta/rng.hpp"

using namespace qdmeta;

TEST_CASE("meta-genotype size for the default network") {
    CHECK(NetworkDims{}.genotype_size() == 222);
    CHECK((NetworkDims{50, 10, 4}.genotype_size()) == 542);
}

TEST_CASE("transform clamps and lays out weights in fixed order") {
    const NetworkDims dims{};
    std::vector<double> w(222, 0.0);
    auto zero = transform(w, dims);
    CHECK(zero.b1 == 0.0);
    CHECK(zero.b2 == 0.0);
    CHECK(std::all_of(zero.w1.begin(), zero.w1.end(), [](double v) { return v == 0.0; }));

    w[0] = 2.0;      // W1[0][0]
    w[21] = -3.0;    // W1[1][1]
    w[200] = 0.4;    // W2[0][0]
    w[219] = -0.7;   // W2[1][9]
    w[220] = 1.5;    // B1
    w[221] = -0.25;  // B2
    auto net = transform(w, dims);
    CHECK(net.w1[0] == 1.0);
    CHECK(net.w1[1 * 20 + 1] == -1.0);
    CHECK(net.w2[0] == 0.4);
    CHECK(net.w2[1 * 10 + 9] == -0.7);
    CHECK(net.b1 == 1.0);
    CHECK(net.b2 == -0.25);

    CHECK_THROWS_AS(transform(std::vector<double>(221, 0.0), dims), std::invalid_argument);
}

TEST_CASE("scaled sigmoid") {
    CHECK(scaled_sigmoid(0.0, 20, 30.0) == 0.5);
    CHECK(scaled_sigmoid(21.0 / 30.0, 20, 30.0) == doctest::Approx(1.0 / (1.0 + std::exp(-1.0))).epsilon(1e-15));
    CHECK(scaled_sigmoid(21.0 / 30.0, 20, 30.0) == doctest::Approx(0.731059).epsilon(1e-6));
    CHECK(scaled_sigmoid(1e6, 10, 30.0) == 1.0);
    CHECK(scaled_sigmoid(-1e6, 10, 30.0) == 0.0);
    double prev = 0.0;
    for (double x = -5.0; x <= 5.0; x += 0.01) {
        const double y = scaled_sigmoid(x, 10, 30.0);
        CHECK(y >= prev);
        prev = y;
    }
    CHECK_THROWS(scaled_sigmoid(0.0, 0, 30.0));
    const std::vector<double> xs{-1.0, 0.0, 1.0};
    const auto ys = scaled_sigmoid(xs, 4, 30.0);
    CHECK(ys[1] == 0.5);
    CHECK(ys[0] == doctest::Approx(1.0 - ys[2]).epsilon(1e-15));
}

TEST_CASE("zero network maps every input to the centre") {
    const auto net = transform(std::vector<double>(222, 0.0), NetworkDims{});
    Rng rng(4);
    for (int i = 0; i < 100; ++i) {
        std::vector<double> b(20);
        for (double& v : b) v = uniform01(rng);
        const auto beta = map_features(net, b);
        CHECK(beta == std::vector<double>{0.5, 0.5});
    }
}

TEST_CASE("miniature 2-2-1 network against manual arithmetic") {
    const NetworkDims dims{2, 2, 1};
    // W1 = [[0.5, -0.25], [0.1, 0.8]], W2 = [[1, -1]], B1 = 0.2, B2 = -0.1
    const std::vector<double> w{0.5, -0.25, 0.1, 0.8, 1.0, -1.0, 0.2, -0.1};
    const auto net = transform(w, dims);
    const std::vector<double> b{0.3, 0.6};
    // Hidden pre-activations 0.2 and 0.71, both scaled by 30/3.
    const double h0 = 1.0 / (1.0 + std::exp(-2.0));
    const double h1 = 1.0 / (1.0 + std::exp(-7.1));
    const double out = 1.0 / (1.0 + std::exp(-10.0 * (h0 - h1 - 0.1)));
    const auto beta = map_features(net, b);
    REQUIRE(beta.size() == 1);
    CHECK(beta[0] == doctest::Approx(out).epsilon(1e-14));
    CHECK(beta[0] == doctest::Approx(0.1012161).epsilon(1e-6));
}

TEST_CASE("forward pass agrees with the flat-vector oracle and stays in range") {
    Rng rng(10);
    const NetworkDims dims{};
    for (int i = 0; i < 10000; ++i) {
        std::vector<double> w(222), b(20);
        for (double& v : w) v = uniform(rng, -1.5, 1.5);
        for (double& v : b) v = uniform01(rng);
        const auto beta = map_features(transform(w, dims), b);
        const auto ref = oracle::features(w, b, 10, 2);
        for (std::size_t t = 0; t < 2; ++t) {
            if (!(beta[t] > 0.0 && beta[t] < 1.0)) FAIL("output outside (0,1)");
            if (std::abs(beta[t] - ref[t]) > 1e-12) FAIL("oracle mismatch " << beta[t] << " vs " << ref[t]);
        }
    }
}

TEST_CASE("map_features rejects mismatched lengths") {
    const auto net = transform(std::vector<double>(222, 0.0), NetworkDims{});
    CHECK_THROWS_AS(map_features(net, std::vector<double>(19, 0.5)), std::invalid_argument);
    std::vector<double> out(3);
    CHECK_THROWS_AS(map_features(net, std::vector<double>(20, 0.5), out), std::invalid_argument);
}
