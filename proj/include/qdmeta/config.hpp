#pragma once

// Flat sectioned key=value run configuration.
//
//   [run]        algorithm, seed, output, checkpoint_interval, replicates, workers
//   [evolution]  genes, init_population, batch_size, eval_budget, bins_per_dim,
//                database_capacity, mutation_rate, mutation_sigma
//   [meta]       lambda, hidden, target, sigmoid_scale, dropped_count,
//                subset_fraction, sigma0, count_meta_evaluations, frozen,
//                rl_enabled, fixed_generations, actions, epsilon, alpha, gamma,
//                trace_decay, min_split_samples, significance
//   [cvt]        centroids, kmeans_samples, centroid_seed
//
// '#' and ';' start comments. Every key is optional; defaults are the
// full-scale Rastrigin settings.

#include <cstdint>
#include <istream>
#include <string>

#include "qdmeta/baselines.hpp"
#include "qdmeta/meta_evolution.hpp"

namespace qdmeta {

enum class Algorithm { QdMetaDimension, QdMetaTranslation, Cvt, FixedMapElites };

std::string to_string(Algorithm algorithm);
/// Throws std::invalid_argument listing the accepted names.
Algorithm algorithm_from_string(const std::string& name);

struct RunConfig {
    Algorithm algorithm = Algorithm::QdMetaTranslation;
    std::uint64_t master_seed = 1;
    std::string output_directory = "qdmeta-out";
    std::size_t checkpoint_interval = 10;  // meta-generations; 0 disables periodic checkpoints
    std::size_t replicate_count = 1;
    std::size_t workers = 1;

    MetaConfig meta{};
    BaselineConfig baseline{};

    /// Meta settings with the objective implied by the algorithm and the shared worker count.
    MetaConfig meta_config() const;
    /// Baseline settings sharing every common field with the meta settings.
    BaselineConfig baseline_config() const;
};

/// Thrown for malformed configuration input; what() starts with "line N:".
class ConfigError : public std::runtime_error {
public:
    ConfigError(std::size_t line, const std::string& message);
    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

RunConfig parse_run_config(std::istream& is);
RunConfig parse_run_config_text(const std::string& text);
/// Throws std::runtime_error when the file cannot be read, ConfigError when it is malformed.
RunConfig load_run_config(const std::string& path);

}  // namespace qdmeta
