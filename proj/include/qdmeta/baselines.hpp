#pragma once

// Reference algorithms run under the same budget and metric schema as QD-Meta:
// CVT-MAP-Elites over the base-feature space and MAP-Elites with one fixed
// feature-map.

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "qdmeta/archive.hpp"
#include "qdmeta/meta_evolution.hpp"
#include "qdmeta/records.hpp"

namespace qdmeta {

enum class BaselineAlgorithm { CvtMapElites, FixedMapElites };

struct BaselineConfig {
    BaselineAlgorithm algorithm = BaselineAlgorithm::CvtMapElites;
    std::uint64_t eval_budget = 100'000'000;
    std::size_t batch_size = 400;
    std::size_t init_population = 2000;
    /// Generations between history rows; also the chunk size of the fixed-map run.
    std::size_t generations_per_record = 10;
    VariationParams variation{};

    // Fixed feature-map grid.
    NetworkDims dims{};
    double sigmoid_scale = kDefaultSigmoidScale;
    std::size_t bins_per_dim = 100;

    // CVT.
    std::size_t centroid_count = 10'000;
    std::size_t kmeans_samples = 1'000'000;
    std::uint64_t centroid_seed = 0;

    std::size_t n_genes() const { return dims.base; }
    void validate() const;
};

struct CvtRunResult {
    CvtArchive archive;
    std::vector<HistoryRow> history;
    std::uint64_t evaluations = 0;
};

struct FixedRunResult {
    GridArchive archive;
    std::vector<HistoryRow> history;
    std::uint64_t evaluations = 0;
};

/// Centroids depend only on (centroid_count, kmeans_samples, genes, centroid_seed).
std::vector<std::vector<double>> baseline_centroids(const BaselineConfig& config);

/// CVT-MAP-Elites; `centroids` may be passed in to share one tessellation
/// across replicates, otherwise baseline_centroids(config) is used.
CvtRunResult run_cvt(const BaselineConfig& config, std::uint64_t seed,
                     const std::vector<std::vector<double>>* centroids = nullptr);

/// MAP-Elites on the grid induced by the feature-map of `w_fixed`.
FixedRunResult run_fixed_map_elites(const BaselineConfig& config, const MetaGenotype& w_fixed, std::uint64_t seed);

/// The MetaConfig-compatible view used to share settings between the two run kinds.
BaselineConfig baseline_from_meta(const MetaConfig& meta, BaselineAlgorithm algorithm);

}  // namespace qdmeta
