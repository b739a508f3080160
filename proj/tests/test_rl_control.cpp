#include <doctest.h>

#include <array>
#include <cmath>
#include <stdexcept>

#include "qdmeta/rl_control.hpp"

using namespace qdmeta;

namespace {

Observation with_stagnation(int k) {
    Observation o;
    o.stagnation = k;
    return o;
}

}  // namespace

TEST_CASE("reward") {
    CHECK(compute_reward(-100.0, -100.0, 10) == 0.0);
    CHECK(compute_reward(-100.0, -120.0, 10) == 0.0);
    CHECK(compute_reward(-100.0, -90.0, 1000) == doctest::Approx(1e-4).epsilon(1e-12));
    CHECK(compute_reward(-100.0, -90.0, 2000) == doctest::Approx(0.5 * compute_reward(-100.0, -90.0, 1000)));
    CHECK(compute_reward(0.0, 3.0, 10) == doctest::Approx(0.3));
    CHECK_THROWS_AS(compute_reward(1.0, 2.0, 0), std::invalid_argument);
}

TEST_CASE("epsilon-greedy selection") {
    QTree tree(3);
    Rng rng(1);
    CHECK(epsilon_greedy(tree, 0, rng, 0.0) == 0);
    tree.q(0, 1) = 5.0;
    tree.q(0, 2) = 3.0;
    CHECK(epsilon_greedy(tree, 0, rng, 0.0) == 1);

    QTree five(5);
    int counts[5] = {};
    for (int i = 0; i < 10000; ++i) counts[epsilon_greedy(five, 0, rng, 1.0)]++;
    for (int c : counts) {
        CHECK(c > 1800);
        CHECK(c < 2200);
    }
    CHECK_THROWS(epsilon_greedy(five, 0, rng, 1.5));
}

TEST_CASE("single SARSA step") {
    QTree tree(2);
    const SarsaParams p{0.1, 0.9, 0.8};
    tree.sarsa_update(0, 0, 1.0, 0, 1, p);
    CHECK(tree.q(0, 0) == 0.1);
    CHECK(tree.q(0, 1) == 0.0);
    CHECK(tree.eligibility(0, 0) == doctest::Approx(0.72).epsilon(1e-15));

    QTree quiet(2);
    quiet.sarsa_update(0, 1, 0.0, 0, 0, p);
    CHECK(quiet.q(0, 0) == 0.0);
    CHECK(quiet.q(0, 1) == 0.0);
}

TEST_CASE("two-state chain reaches the analytic fixed point") {
    QTree tree(1);
    tree.apply_split(0, Split{4, 5.0, 1.0, 0.5});
    const auto leaves = tree.leaves();
    REQUIRE(leaves.size() == 2);
    const SarsaParams p{0.1, 0.9, 0.8};
    std::size_t s = leaves[0];
    for (int i = 0; i < 10000; ++i) {
        const std::size_t next = s == leaves[0] ? leaves[1] : leaves[0];
        tree.sarsa_update(s, 0, 1.0, next, 0, p);
        s = next;
    }
    CHECK(std::abs(tree.q(leaves[0], 0) - 10.0) < 1e-3);
    CHECK(std::abs(tree.q(leaves[1], 0) - 10.0) < 1e-3);
}

TEST_CASE("traces decay by lambda*gamma when nothing new is visited") {
    QTree tree(3);
    const SarsaParams p{0.1, 0.9, 0.8};
    tree.sarsa_update(0, 2, 0.5, 0, 1, p);
    tree.sarsa_update(0, 1, 0.5, 0, 0, p);
    const double before = tree.total_eligibility() - tree.eligibility(0, 0);
    // Revisit a pair whose trace is then reset to 1 and decayed like the rest.
    tree.sarsa_update(0, 0, 0.0, 0, 0, p);
    CHECK(tree.total_eligibility() == doctest::Approx((before + 1.0) * 0.72).epsilon(1e-14));
}

TEST_CASE("discretisation") {
    QTree tree(2);
    CHECK(tree.discretise(with_stagnation(3)) == tree.discretise(with_stagnation(80)));
    CHECK(tree.leaf_count() == 1);
    tree.apply_split(0, Split{4, 5.0, 1.0, 0.5});
    CHECK(tree.leaf_count() == 2);
    CHECK(tree.discretise(with_stagnation(3)) != tree.discretise(with_stagnation(8)));
    CHECK(tree.discretise(with_stagnation(3)) == tree.discretise(with_stagnation(3)));
    CHECK(tree.node(tree.discretise(with_stagnation(8))).is_leaf());
    CHECK_THROWS(tree.apply_split(0, Split{0, 0.0, 1.0, 0.5}));
}

TEST_CASE("KS-based splitting") {
    SUBCASE("too few samples") {
        QTree tree(2, 30);
        for (int i = 0; i < 29; ++i) tree.record_sample(0, with_stagnation(i), i < 15 ? 0.0 : 1.0);
        CHECK_FALSE(tree.consider_split(0).has_value());
    }
    SUBCASE("identical targets never split") {
        QTree tree(2, 30);
        for (int i = 0; i < 100; ++i) tree.record_sample(0, with_stagnation(i), 0.25);
        CHECK_FALSE(tree.consider_split(0).has_value());
    }
    SUBCASE("well separated targets split") {
        QTree tree(2, 30);
        tree.q(0, 1) = 0.7;
        for (int i = 0; i < 50; ++i) tree.record_sample(0, with_stagnation(2), 0.0);
        for (int i = 0; i < 50; ++i) tree.record_sample(0, with_stagnation(8), 1.0);
        const auto split = tree.consider_split(0);
        REQUIRE(split.has_value());
        CHECK(split->dimension == 4);
        CHECK(split->statistic == 1.0);
        CHECK(split->critical == doctest::Approx(0.272).epsilon(0.01));
        tree.apply_split(0, *split);
        for (std::size_t leaf : tree.leaves()) CHECK(tree.q(leaf, 1) == 0.7);
    }
    CHECK(ks_statistic({1, 2, 3}, {1, 2, 3}) == 0.0);
    CHECK(ks_statistic({0, 0}, {1, 1}) == 1.0);
}

TEST_CASE("action set validation") {
    CHECK(ActionSet{}.values() == std::vector<int>{5, 10, 25, 50, 100});
    CHECK_THROWS(ActionSet(std::vector<int>{}));
    CHECK_THROWS(ActionSet(std::vector<int>{5, 5}));
    CHECK_THROWS(ActionSet(std::vector<int>{-1, 3}));
}

TEST_CASE("disabled controller returns the fixed schedule") {
    ControlConfig cfg;
    cfg.enabled = false;
    cfg.fixed_generations = 7;
    GenerationController c(cfg);
    Rng rng(3), untouched(3);
    for (int i = 0; i < 20; ++i) {
        CHECK(c.choose(with_stagnation(i), rng) == 7);
        c.finish(0.5);
    }
    CHECK(rng() == untouched());
}

TEST_CASE("enabled controller learns and serialises") {
    ControlConfig cfg;
    cfg.epsilon = 0.2;
    cfg.min_split_samples = 10;
    GenerationController c(cfg);
    CHECK_THROWS_AS(c.finish(1.0), std::logic_error);
    Rng rng(11);
    for (int i = 0; i < 60; ++i) {
        const int g = c.choose(with_stagnation(i % 12), rng);
        CHECK(std::find(cfg.actions.begin(), cfg.actions.end(), g) != cfg.actions.end());
        c.finish(g == 100 && i % 12 > 6 ? 1.0 : 0.0);
    }
    const GenerationController back = GenerationController::from_json(c.to_json(), cfg);
    CHECK(back.to_json() == c.to_json());
    GenerationController a = c, b = back;
    Rng r1(5), r2(5);
    for (int i = 0; i < 10; ++i) {
        CHECK(a.choose(with_stagnation(i), r1) == b.choose(with_stagnation(i), r2));
        a.finish(0.1);
        b.finish(0.1);
    }
}
