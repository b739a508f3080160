#include "qdmeta/baselines.hpp"

#include <algorithm>
#include <stdexcept>

namespace qdmeta {

void BaselineConfig::validate() const {
    if (batch_size == 0 || init_population == 0 || generations_per_record == 0) {
        throw std::invalid_argument("baseline counts must be positive");
    }
    if (dims.base == 0) throw std::invalid_argument("genotype length must be positive");
    if (algorithm == BaselineAlgorithm::CvtMapElites) {
        if (centroid_count == 0) throw std::invalid_argument("centroid_count must be positive");
        if (kmeans_samples < centroid_count) throw std::invalid_argument("kmeans_samples must be >= centroid_count");
    } else if (bins_per_dim == 0) {
        throw std::invalid_argument("bins_per_dim must be positive");
    }
}

namespace {

HistoryRow metrics_row(std::size_t chunk, std::uint64_t evaluations, std::span<const Solution> solutions) {
    const QdMetrics m = qd_metrics(solutions);
    HistoryRow row;
    row.meta_generation = chunk;
    row.evaluations = evaluations;
    row.individual_id = 0;
    row.archive_count = m.count;
    row.mean_fitness = m.mean_fitness;
    row.max_fitness = m.max_fitness;
    return row;
}

// Runs the shared schedule: initial random genotypes, then chunks of
// generations_per_record * batch_size cycles while a whole chunk fits, then
// whatever budget is left. `insert` adds one evaluated solution to the archive.
template <typename Archive, typename Insert>
std::vector<HistoryRow> run_schedule(const BaselineConfig& cfg, std::uint64_t seed, Archive& archive,
                                     EvaluationCounter& counter, Insert&& insert) {
    const std::size_t n_init =
        static_cast<std::size_t>(std::min<std::uint64_t>(cfg.init_population, cfg.eval_budget));
    Rng init_rng = make_stream(seed, "init");
    for (std::size_t i = 0; i < n_init; ++i) insert(make_solution(Genotype::random(cfg.n_genes(), init_rng), counter));

    auto cycles = [&](std::uint64_t n, Rng& rng) {
        for (std::uint64_t k = 0; k < n; ++k) {
            const Solution& parent = archive.select_random(rng);
            insert(make_solution(mutate_gaussian(parent.genotype, cfg.variation.rate, cfg.variation.sigma, rng),
                                 counter));
        }
    };

    std::vector<HistoryRow> history;
    const std::uint64_t chunk = static_cast<std::uint64_t>(cfg.generations_per_record) * cfg.batch_size;
    std::size_t k = 0;
    while (cfg.eval_budget - counter.count() >= chunk) {
        Rng rng = make_stream(seed, "me", k, 0);
        cycles(chunk, rng);
        HistoryRow row = metrics_row(k, counter.count(), archive.solutions());
        row.generations_action = static_cast<int>(cfg.generations_per_record);
        history.push_back(row);
        ++k;
    }
    const std::uint64_t left = cfg.eval_budget - counter.count();
    if (left > 0) {
        Rng rng = make_stream(seed, "me", k, 0);
        cycles(left, rng);
        history.push_back(metrics_row(k, counter.count(), archive.solutions()));
    }
    return history;
}

}  // namespace

std::vector<std::vector<double>> baseline_centroids(const BaselineConfig& config) {
    Rng rng = make_stream(config.centroid_seed, "centroids");
    return build_centroids(config.centroid_count, config.kmeans_samples, config.n_genes(), rng);
}

CvtRunResult run_cvt(const BaselineConfig& config, std::uint64_t seed,
                     const std::vector<std::vector<double>>* centroids) {
    config.validate();
    CvtRunResult result{CvtArchive(centroids ? *centroids : baseline_centroids(config)), {}, 0};
    if (result.archive.centroids().front().size() != config.n_genes()) {
        throw std::invalid_argument("centroid dimension does not match the genotype length");
    }
    EvaluationCounter counter;
    result.history =
        run_schedule(config, seed, result.archive, counter, [&](const Solution& s) { result.archive.try_insert(s); });
    result.evaluations = counter.count();
    return result;
}

FixedRunResult run_fixed_map_elites(const BaselineConfig& config, const MetaGenotype& w_fixed, std::uint64_t seed) {
    config.validate();
    const FeatureMapNetwork net = transform(w_fixed, config.dims, config.sigmoid_scale);
    FixedRunResult result{GridArchive(config.dims.target, config.bins_per_dim), {}, 0};
    EvaluationCounter counter;
    std::vector<double> beta(config.dims.target);
    result.history = run_schedule(config, seed, result.archive, counter, [&](const Solution& s) {
        map_features(net, s.base_features, beta);
        result.archive.try_insert(beta, s);
    });
    result.evaluations = counter.count();
    return result;
}

BaselineConfig baseline_from_meta(const MetaConfig& meta, BaselineAlgorithm algorithm) {
    BaselineConfig b;
    b.algorithm = algorithm;
    b.eval_budget = meta.eval_budget;
    b.batch_size = meta.batch_size;
    b.init_population = meta.init_population;
    b.generations_per_record = static_cast<std::size_t>(meta.control.fixed_generations);
    b.variation = meta.variation;
    b.dims = meta.dims;
    b.sigmoid_scale = meta.sigmoid_scale;
    b.bins_per_dim = meta.bins_per_dim;
    return b;
}

}  // namespace qdmeta
