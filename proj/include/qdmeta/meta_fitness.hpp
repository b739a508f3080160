#pragma once

// Evaluation accounting and the two archive-level meta-objectives.

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "qdmeta/archive.hpp"
#include "qdmeta/feature_map.hpp"

namespace qdmeta {

/// Audited tally of landscape evaluations; safe to bump from several workers.
class EvaluationCounter {
public:
    EvaluationCounter() = default;
    EvaluationCounter(const EvaluationCounter& other) : count_(other.count()) {}
    EvaluationCounter& operator=(const EvaluationCounter& other) {
        reset(other.count());
        return *this;
    }

    void add(std::uint64_t n = 1) { count_.fetch_add(n, std::memory_order_relaxed); }
    std::uint64_t count() const { return count_.load(std::memory_order_relaxed); }
    void reset(std::uint64_t value = 0) { count_.store(value, std::memory_order_relaxed); }

private:
    std::atomic<std::uint64_t> count_{0};
};

/// Base Rastrigin fitness of a genotype, counted once.
double evaluate_fitness(const Genotype& g, EvaluationCounter& counter);

/// Evaluates `g`; its base-features are the genotype itself.
Solution make_solution(Genotype g, EvaluationCounter& counter);

enum class MetaObjective { Dimension, Translation };

std::string to_string(MetaObjective objective);
MetaObjective meta_objective_from_string(const std::string& name);

struct MetaIndividual {
    std::size_t id = 0;
    MetaGenotype meta_genotype;
    GridArchive archive{2, 1};
    double meta_fitness = 0.0;
};

/// Size of the random archive subset scored by a meta-objective: floor(fraction n), at least 1.
std::size_t meta_subset_size(std::size_t archive_size, double fraction);

/// `k` distinct indices of [0, n), uniformly without replacement.
std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t k, Rng& rng);

/// 10 (n - 1) + (n - 1)(5.12^2 + 10): bounds |f| of the one-dimension-dropped Rastrigin.
double dimension_normaliser(std::size_t n_genes);

/// F_d on a fixed subset:
///   (1/|J|) sum_j sum_g [ M + f_{-j}(g) ] + alpha sum_g sum_{g' != g} |g - g'|,
/// alpha = sqrt(n) M / (|subset| - 1) (divisor 1 for a singleton subset).
/// Distances are taken between normalised genotypes. Each (g, j) pair counts one evaluation.
double dimension_meta_fitness_on(std::span<const Solution> subset, std::span<const std::size_t> dropped,
                                 EvaluationCounter* counter);

/// 10 n + n ((1.1 * 5.12 + 0.5)^2 + 10): bounds |f(T x)| for every sampled translation.
double translation_normaliser(std::size_t n_genes);

/// F_t on a fixed subset and translation set:
///   (10 / (|T| n)) sum_T sum_g [ M_t + f(T x_g) ],  M_t = translation_normaliser(n),
/// so every solution adds a term in [0, 10 M_t / n] and larger archives never score lower.
/// Each (g, T) pair counts one evaluation.
double translation_meta_fitness_on(std::span<const Solution> subset, std::span<const Translation> translations,
                                   EvaluationCounter* counter);

/// Draws the subset (and, for F_t, sixteen translations) and scores the archive.
/// Throws std::logic_error on an empty archive.
double meta_fitness_dimension(std::span<const Solution> archive, std::span<const std::size_t> dropped,
                              double subset_fraction, Rng& rng, EvaluationCounter* counter);
double meta_fitness_translation(std::span<const Solution> archive, double subset_fraction, Rng& rng,
                                EvaluationCounter* counter);

/// Evaluations a meta-objective charges for an archive of `archive_size` solutions.
std::uint64_t meta_fitness_cost(MetaObjective objective, std::size_t archive_size, double subset_fraction,
                                std::size_t dropped_count);

}  // namespace qdmeta
