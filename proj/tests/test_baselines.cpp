#include <doctest.h>

#include <stdexcept>

#include "qdmeta/baselines.hpp"

using namespace qdmeta;

namespace {

BaselineConfig small(BaselineAlgorithm alg) {
    BaselineConfig c;
    c.algorithm = alg;
    c.eval_budget = 12345;
    c.batch_size = 50;
    c.init_population = 200;
    c.generations_per_record = 4;
    c.bins_per_dim = 10;
    c.centroid_count = 64;
    c.kmeans_samples = 2000;
    return c;
}

bool qd_columns_equal(const std::vector<HistoryRow>& a, const std::vector<HistoryRow>& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i].meta_generation != b[i].meta_generation || a[i].evaluations != b[i].evaluations ||
            a[i].individual_id != b[i].individual_id || a[i].archive_count != b[i].archive_count ||
            a[i].mean_fitness != b[i].mean_fitness || a[i].max_fitness != b[i].max_fitness) {
            return false;
        }
    }
    return true;
}

}  // namespace

TEST_CASE("CVT run spends the budget exactly and respects capacity") {
    const auto cfg = small(BaselineAlgorithm::CvtMapElites);
    const auto centroids = baseline_centroids(cfg);
    CHECK(centroids.size() == 64);
    CHECK(baseline_centroids(cfg) == centroids);
    const auto r = run_cvt(cfg, 3, &centroids);
    CHECK(r.evaluations == 12345);
    CHECK(r.history.back().evaluations == 12345);
    for (const auto& row : r.history) CHECK(row.archive_count <= 64);
    CHECK(run_cvt(cfg, 3).history == r.history);
    // Chunks of 4 x 50 evaluations after the 200 initial ones, then the remainder.
    CHECK(r.history.size() == (12345 - 200) / 200 + 1);
    CHECK(r.history.front().evaluations == 400);

    auto bad = cfg;
    bad.kmeans_samples = 10;
    CHECK_THROWS_AS(run_cvt(bad, 1), std::invalid_argument);
    const std::vector<std::vector<double>> wrong_dim(4, std::vector<double>(3, 0.5));
    CHECK_THROWS(run_cvt(cfg, 1, &wrong_dim));
}

TEST_CASE("fixed-map run") {
    const auto cfg = small(BaselineAlgorithm::FixedMapElites);
    Rng rng(4);
    std::vector<double> w(222);
    for (double& v : w) v = uniform(rng, -1.0, 1.0);
    const auto r = run_fixed_map_elites(cfg, w, 9);
    CHECK(r.evaluations == 12345);
    for (std::size_t i = 1; i < r.history.size(); ++i) {
        CHECK(*r.history[i].max_fitness >= *r.history[i - 1].max_fitness);
        CHECK(r.history[i].archive_count >= r.history[i - 1].archive_count);
    }
    const auto zero = run_fixed_map_elites(cfg, std::vector<double>(222, 0.0), 9);
    CHECK(zero.archive.size() == 1);
    CHECK(zero.archive.cell_of(std::vector<double>{0.5, 0.5}) == zero.archive.pool().cells()[0]);
}

TEST_CASE("frozen single-individual meta-evolution equals the fixed-map run") {
    MetaConfig m;
    m.lambda = 1;
    m.frozen_meta = true;
    m.control.enabled = false;
    m.control.fixed_generations = 3;
    m.count_meta_evaluations = false;
    m.init_population = 300;
    m.batch_size = 40;
    m.eval_budget = 10000;
    m.bins_per_dim = 20;
    m.database_capacity = 20000;
    const std::uint64_t seed = 17;
    const auto meta = run_meta_evolution(m, seed);
    const auto fixed = run_fixed_map_elites(baseline_from_meta(m, BaselineAlgorithm::FixedMapElites),
                                            initial_meta_mean(seed, 222), seed);
    CHECK(qd_columns_equal(meta.history, fixed.history));
    CHECK(meta.best.archive == fixed.archive);
    CHECK(meta.evaluations == fixed.evaluations);
}
