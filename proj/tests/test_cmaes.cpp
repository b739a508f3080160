#include <doctest.h>

#include <cmath>
#include <numeric>
#include <stdexcept>

#include "qdmeta/cmaes.hpp"

using namespace qdmeta;

namespace {

double sphere(const std::vector<double>& x) {
    double s = 0.0;
    for (double v : x) s += v * v;
    return -s;
}

/// Generations until ||m|| < tol, or 0 if the budget runs out first.
std::size_t sphere_run(std::uint64_t seed, std::size_t budget, double tol) {
    Rng rng(seed);
    std::vector<double> m0(10);
    for (double& v : m0) v = uniform(rng, -3.0, 3.0);
    CmaState s = cma_init(10, 10, 1.0, m0);
    for (std::size_t evals = 0; evals + 10 <= budget; evals += 10) {
        const auto xs = cma_sample(s, rng);
        std::vector<double> f(xs.size());
        for (std::size_t i = 0; i < xs.size(); ++i) f[i] = sphere(xs[i]);
        cma_update(s, xs, f);
        if (s.mean.norm() < tol) return evals + 10;
    }
    return 0;
}

bool same_state(const CmaState& a, const CmaState& b) {
    return a.mean == b.mean && a.cov == b.cov && a.sigma == b.sigma && a.p_sigma == b.p_sigma && a.p_c == b.p_c &&
           a.basis == b.basis && a.scales == b.scales;
}

}  // namespace

TEST_CASE("initial state and default constants") {
    const CmaState s = cma_init(222, 10, 0.3, std::vector<double>(222, 0.1));
    CHECK(s.constants.mu == 5);
    const auto& w = s.constants.weights;
    CHECK(std::accumulate(w.begin(), w.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-14));
    for (std::size_t i = 0; i < w.size(); ++i) {
        CHECK(w[i] > 0.0);
        if (i > 0) CHECK(w[i] <= w[i - 1]);
    }
    CHECK(s.cov == Eigen::MatrixXd::Identity(222, 222));
    CHECK(s.p_sigma.isZero(0.0));
    CHECK(s.p_c.isZero(0.0));
    CHECK(s.sigma == 0.3);
    // Reference values for mu_eff with lambda = 10 (log-rank weights on the top 5).
    double sw = 0.0, sw2 = 0.0;
    for (int i = 1; i <= 5; ++i) {
        const double raw = std::log(5.5) - std::log(i);
        sw += raw;
        sw2 += raw * raw;
    }
    CHECK(s.constants.mu_eff == doctest::Approx(sw * sw / sw2).epsilon(1e-12));

    CHECK_THROWS(cma_init(0, 10, 0.3, {}));
    CHECK_THROWS(cma_init(3, 0, 0.3, std::vector<double>(3)));
    CHECK_THROWS(cma_init(3, 4, 0.0, std::vector<double>(3)));
    CHECK_THROWS(cma_init(3, 4, 0.3, std::vector<double>(2)));
    CHECK_NOTHROW(cma_init(3, 1, 0.3, std::vector<double>(3)));
}

TEST_CASE("sampling statistics") {
    Rng rng(8);
    SUBCASE("tiny step size collapses onto the mean") {
        CmaState s = cma_init(4, 6, 1e-300, {0.1, 0.2, 0.3, 0.4});
        for (const auto& x : cma_sample(s, rng)) {
            for (std::size_t i = 0; i < 4; ++i) CHECK(x[i] == doctest::Approx(s.mean[i]).epsilon(1e-15));
        }
    }
    SUBCASE("mean and covariance match the distribution") {
        const std::size_t n = 100000;
        CmaState s = cma_init(5, n, 0.7, {1.0, -1.0, 0.5, 0.0, 2.0});
        Eigen::MatrixXd a = Eigen::MatrixXd::Random(5, 5);
        s.cov = a * a.transpose() + Eigen::MatrixXd::Identity(5, 5);
        cma_refresh_decomposition(s);
        const auto xs = cma_sample(s, rng);
        Eigen::VectorXd mean = Eigen::VectorXd::Zero(5);
        for (const auto& x : xs) mean += Eigen::Map<const Eigen::VectorXd>(x.data(), 5);
        mean /= static_cast<double>(n);
        const Eigen::MatrixXd target = s.sigma * s.sigma * s.cov;
        for (int i = 0; i < 5; ++i) {
            CHECK(std::abs(mean[i] - s.mean[i]) < 4.0 * std::sqrt(target(i, i) / static_cast<double>(n)));
        }
        Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(5, 5);
        for (const auto& x : xs) {
            const Eigen::VectorXd d = Eigen::Map<const Eigen::VectorXd>(x.data(), 5) - mean;
            cov += d * d.transpose();
        }
        cov /= static_cast<double>(n - 1);
        CHECK((cov - target).norm() / target.norm() < 0.10);
    }
}

TEST_CASE("update rules") {
    Rng rng(3);
    SUBCASE("identical samples keep the mean") {
        CmaState s = cma_init(3, 4, 0.5, {0.2, -0.4, 0.9});
        const std::vector<std::vector<double>> xs(4, {0.2, -0.4, 0.9});
        cma_update(s, xs, {1.0, 2.0, 3.0, 4.0});
        CHECK(s.mean[0] == doctest::Approx(0.2).epsilon(1e-15));
        CHECK(s.mean[1] == doctest::Approx(-0.4).epsilon(1e-15));
        CHECK(s.mean[2] == doctest::Approx(0.9).epsilon(1e-15));
    }
    SUBCASE("strictly monotone fitness transforms give identical states") {
        CmaState a = cma_init(6, 8, 0.4, std::vector<double>(6, 0.0));
        CmaState b = a;
        CmaState c = a;
        for (int g = 0; g < 50; ++g) {
            const auto xs = cma_sample(a, rng);
            std::vector<double> f(xs.size()), f2(xs.size()), f3(xs.size());
            for (std::size_t i = 0; i < xs.size(); ++i) {
                f[i] = sphere(xs[i]);
                f2[i] = 3.5 * f[i];
                f3[i] = std::exp(f[i]) - 7.0;
            }
            cma_update(a, xs, f);
            cma_update(b, xs, f2);
            cma_update(c, xs, f3);
            REQUIRE(same_state(a, b));
            REQUIRE(same_state(a, c));
        }
    }
    SUBCASE("zero learning rates freeze covariance and step size") {
        CmaState s = cma_init(4, 6, 0.8, std::vector<double>(4, 0.0));
        s.constants.c_1 = 0.0;
        s.constants.c_mu = 0.0;
        s.constants.c_sigma = 0.0;
        const Eigen::MatrixXd cov = s.cov;
        for (int g = 0; g < 20; ++g) {
            const auto xs = cma_sample(s, rng);
            std::vector<double> f(xs.size());
            for (std::size_t i = 0; i < xs.size(); ++i) f[i] = sphere(xs[i]);
            cma_update(s, xs, f);
            CHECK(s.cov == cov);
            CHECK(s.sigma == 0.8);
        }
    }
    SUBCASE("invalid updates are rejected") {
        CmaState s = cma_init(2, 3, 0.5, {0.0, 0.0});
        const auto xs = cma_sample(s, rng);
        CHECK_THROWS(cma_update(s, xs, {1.0, 2.0}));
        CHECK_THROWS(cma_update(s, xs, {1.0, std::nan(""), 2.0}));
    }
}

TEST_CASE("10-D sphere converges in 30 of 30 runs") {
    for (std::uint64_t seed = 1; seed <= 30; ++seed) {
        CAPTURE(seed);
        CHECK(sphere_run(seed, 20000, 1e-6) > 0);
    }
}

TEST_CASE("state round-trips through JSON") {
    Rng rng(4);
    CmaState s = cma_init(5, 7, 0.4, std::vector<double>(5, 0.3));
    for (int g = 0; g < 12; ++g) {
        const auto xs = cma_sample(s, rng);
        std::vector<double> f(xs.size());
        for (std::size_t i = 0; i < xs.size(); ++i) f[i] = sphere(xs[i]);
        cma_update(s, xs, f);
    }
    const CmaState back = cma_from_json(cma_to_json(s));
    CHECK(same_state(s, back));
    CHECK(back.generation == s.generation);
    Rng r1(9), r2(9);
    CHECK(cma_sample(s, r1) == cma_sample(back, r2));
}
