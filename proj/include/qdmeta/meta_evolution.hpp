#pragma once

// The QD-Meta loop: a circular database of every evaluated solution, a
// CMA-ES population of feature-maps whose archives are rebuilt from that
// database each meta-generation, MAP-Elites iterations on every archive, and
// archive-level meta-fitness driving CMA-ES and the generation controller.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "qdmeta/archive.hpp"
#include "qdmeta/cmaes.hpp"
#include "qdmeta/database.hpp"
#include "qdmeta/feature_map.hpp"
#include "qdmeta/meta_fitness.hpp"
#include "qdmeta/records.hpp"
#include "qdmeta/rl_control.hpp"

namespace qdmeta {

struct VariationParams {
    double rate = 0.10;
    double sigma = 0.05;
};

struct MetaConfig {
    std::size_t lambda = 10;
    NetworkDims dims{};  // dims.base doubles as the genotype length
    double sigmoid_scale = kDefaultSigmoidScale;
    std::size_t init_population = 2000;
    std::size_t batch_size = 400;
    std::uint64_t eval_budget = 100'000'000;
    std::size_t bins_per_dim = 100;
    std::size_t database_capacity = 500'000;
    VariationParams variation{};
    MetaObjective objective = MetaObjective::Translation;
    std::size_t dropped_count = 10;
    double subset_fraction = 0.10;
    double sigma0 = 0.3;
    /// Charge meta-fitness probes against eval_budget.
    bool count_meta_evaluations = true;
    /// Keep every meta-individual at the CMA-ES initial mean and skip the update.
    bool frozen_meta = false;
    ControlConfig control{};
    std::size_t workers = 1;

    std::size_t n_genes() const { return dims.base; }
    /// Throws std::invalid_argument describing the first violated constraint.
    void validate() const;
};

std::string meta_config_to_json(const MetaConfig& config);
MetaConfig meta_config_from_json(const std::string& text);

/// Shared MAP-Elites inner loop parameters.
struct MapElitesContext {
    VariationParams variation{};
    EvaluationCounter* counter = nullptr;
};

/// p random genotypes, evaluated and stored.
CircularDatabase init_database(std::size_t count, std::size_t n_genes, std::size_t capacity, Rng& rng,
                               EvaluationCounter& counter);

/// Fresh archive holding every database entry passed through the feature-map of `w`.
GridArchive build_map_from_database(const FeatureMapNetwork& net, const CircularDatabase& db, std::size_t bins_per_dim);

/// `n` select-mutate-evaluate-insert cycles; every child also goes to `db`.
/// Throws std::logic_error on an empty archive (unless n == 0). Returns n.
std::uint64_t me_evaluations(std::uint64_t n, GridArchive& archive, const FeatureMapNetwork& net,
                             CircularDatabase& db, const MapElitesContext& ctx, Rng& rng);

/// me_evaluations(n_generations * batch_size, ...).
std::uint64_t me_iterations(std::size_t n_generations, std::size_t batch_size, GridArchive& archive,
                            const FeatureMapNetwork& net, CircularDatabase& db, const MapElitesContext& ctx,
                            Rng& rng);

/// Initial CMA-ES mean: uniform in [-1,1]^D from the "cma-init" stream of `seed`.
MetaGenotype initial_meta_mean(std::uint64_t seed, std::size_t genotype_size);

/// Dropped dimensions used by the Dimension objective, drawn once per run.
std::vector<std::size_t> draw_dropped_dimensions(std::uint64_t seed, std::size_t n_genes, std::size_t count);

struct MetaRunResult {
    MetaIndividual best;
    std::vector<MetaIndividual> population;  // last completed meta-generation
    std::vector<HistoryRow> history;
    std::vector<ControlTraceRow> control_trace;
    std::vector<double> best_meta_fitness_trace;  // running max per meta-generation
    std::uint64_t evaluations = 0;
    std::size_t meta_generations = 0;
};

class MetaEvolution {
public:
    /// Validates the config and builds the initial database.
    MetaEvolution(MetaConfig config, std::uint64_t seed);

    bool finished() const { return finished_; }
    /// Runs one meta-generation, or spends the remaining budget on the best
    /// archive when a full meta-generation no longer fits.
    void step();
    MetaRunResult run();
    MetaRunResult result() const;

    void save_checkpoint(const std::filesystem::path& dir) const;
    static MetaEvolution resume(const std::filesystem::path& dir);

    const MetaConfig& config() const { return config_; }
    /// Worker count never affects results, so it may change between resumes.
    void set_workers(std::size_t workers) { config_.workers = std::max<std::size_t>(workers, 1); }
    std::uint64_t seed() const { return seed_; }
    std::size_t meta_generation() const { return generation_; }
    std::uint64_t evaluations() const { return counter_.count(); }
    const CircularDatabase& database() const { return db_; }
    const CmaState& cma() const { return cma_; }
    const GenerationController& controller() const { return controller_; }
    const std::vector<MetaIndividual>& population() const { return population_; }
    const std::vector<HistoryRow>& history() const { return history_; }
    const std::vector<ControlTraceRow>& control_trace() const { return control_trace_; }
    const std::vector<std::size_t>& dropped_dimensions() const { return dropped_; }

private:
    struct Resume {};
    MetaEvolution(MetaConfig config, std::uint64_t seed, Resume);

    std::uint64_t remaining() const;
    std::uint64_t generation_cost_bound(int generations) const;
    double score(const GridArchive& archive, std::size_t individual);
    void run_tail();

    MetaConfig config_;
    std::uint64_t seed_;
    EvaluationCounter counter_;
    CircularDatabase db_;
    CmaState cma_;
    GenerationController controller_;
    std::vector<std::size_t> dropped_;
    std::vector<MetaIndividual> population_;
    std::vector<HistoryRow> history_;
    std::vector<ControlTraceRow> control_trace_;
    std::vector<double> best_trace_;
    Observation observation_{};
    double best_ever_ = 0.0;
    std::size_t generation_ = 0;
    bool finished_ = false;
    bool tail_done_ = false;
};

/// Convenience wrapper: construct and run to completion.
MetaRunResult run_meta_evolution(const MetaConfig& config, std::uint64_t seed);

}  // namespace qdmeta
