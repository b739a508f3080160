#include <doctest.h>

#include <algorithm>
#include <set>
#include <stdexcept>

#include "property_checks.hpp"
#include "qdmeta/evaluation.hpp"

using namespace qdmeta;

namespace {

std::vector<Solution> archive_of(std::size_t n, Rng& rng) {
    std::vector<Solution> out;
    for (std::size_t i = 0; i < n; ++i) out.push_back(props::random_solution(rng, 20));
    return out;
}

}  // namespace

TEST_CASE("adaptation test edge cases") {
    Rng rng(1);
    const auto arch = archive_of(30, rng);
    const Landscape land = DimensionNoise{2, 7};

    const auto one = adaptation_test(arch, land, 1, rng);
    CHECK(one.best_so_far.size() == 1);
    CHECK(one.evaluated.size() == 1);

    const std::vector<Solution> single{arch[4]};
    const auto flat = adaptation_test(single, land, 100, rng);
    REQUIRE(flat.best_so_far.size() == 100);
    const double v = evaluate(land, decode(arch[4].genotype).coords);
    for (double x : flat.best_so_far) CHECK(x == v);

    CHECK_THROWS_AS(adaptation_test({}, land, 10, rng), std::logic_error);
    CHECK_THROWS_AS(adaptation_test(arch, land, 0, rng), std::invalid_argument);
}

TEST_CASE("exhaustive search finds the archive maximum and never repeats") {
    Rng rng(2);
    const auto arch = archive_of(40, rng);
    const Landscape land = Translation{-0.75, 0.25};
    const auto curve = adaptation_test(arch, land, 100, rng);
    double best = -1e300;
    for (const auto& s : arch) best = std::max(best, evaluate(land, decode(s.genotype).coords));
    CHECK(curve.best_so_far.back() == best);
    CHECK(curve.best_so_far[39] == best);
    CHECK(std::set<std::size_t>(curve.evaluated.begin(), curve.evaluated.end()).size() == 40);
    CHECK(std::is_sorted(curve.best_so_far.begin(), curve.best_so_far.end()));
}

TEST_CASE("curve summaries") {
    AdaptationCurve a{0, {1.0, 2.0, 3.0}, {}};
    AdaptationCurve b{1, {3.0, 4.0, 5.0}, {}};
    const std::vector<AdaptationCurve> single{a};
    const auto s1 = summarise_curves(single);
    CHECK(s1.mean == a.best_so_far);
    CHECK(s1.standard_error == std::vector<double>{0.0, 0.0, 0.0});

    const std::vector<AdaptationCurve> copies{a, a, a};
    CHECK(summarise_curves(copies).mean == a.best_so_far);

    const std::vector<AdaptationCurve> two{a, b};
    const auto s2 = summarise_curves(two);
    CHECK(s2.mean == std::vector<double>{2.0, 3.0, 4.0});
    CHECK(s2.standard_error[2] == doctest::Approx(1.0).epsilon(1e-14));  // sd sqrt(2), n 2
    CHECK(s2.n_curves == 2);

    AdaptationCurve shorter{2, {1.0}, {}};
    const std::vector<AdaptationCurve> ragged{a, shorter};
    CHECK_THROWS(summarise_curves(ragged));
}

TEST_CASE("suite runs: pointwise mean equals the hand average, worker-independent") {
    Rng rng(3);
    const auto arch = archive_of(150, rng);
    const auto suite = translation_test_landscapes();
    Rng r1(8), r2(8);
    const auto serial = run_test_suite(arch, suite, 100, r1, 1);
    const auto parallel = run_test_suite(arch, suite, 100, r2, 3);
    REQUIRE(serial.curves.size() == 120);
    double sum = 0.0;
    for (const auto& c : serial.curves) sum += c.best_so_far[99];
    CHECK(serial.summary.mean[99] == doctest::Approx(sum / 120.0).epsilon(1e-14));
    for (std::size_t i = 0; i < 120; ++i) {
        CHECK(serial.curves[i].scenario_id == i);
        CHECK(serial.curves[i].best_so_far == parallel.curves[i].best_so_far);
    }
    Rng r3(1);
    CHECK(dimension_test_landscapes(r3).size() == 120);
    CHECK_THROWS(run_test_suite(arch, std::vector<Landscape>{}, 10, r1));
}

TEST_CASE("best meta-individual selection") {
    std::vector<MetaIndividual> pop(3);
    for (std::size_t i = 0; i < 3; ++i) pop[i].id = i;
    pop[0].meta_fitness = 1.0;
    pop[1].meta_fitness = 5.0;
    pop[2].meta_fitness = 5.0;
    CHECK(select_best_meta_individual(pop).id == 1);
    pop[1].meta_fitness = 2.0;
    CHECK(select_best_meta_individual(pop).id == 2);
    CHECK(select_best_meta_individual(std::span(pop).first(1)).id == 0);
    CHECK_THROWS(select_best_meta_individual({}));
}
