#include "qdmeta/meta_fitness.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace qdmeta {

double evaluate_fitness(const Genotype& g, EvaluationCounter& counter) {
    counter.add();
    return rastrigin(decode(g).coords);
}

Solution make_solution(Genotype g, EvaluationCounter& counter) {
    Solution s;
    s.fitness = evaluate_fitness(g, counter);
    s.base_features = g.genes;
    s.genotype = std::move(g);
    return s;
}

std::string to_string(MetaObjective objective) {
    return objective == MetaObjective::Dimension ? "dimension" : "translation";
}

MetaObjective meta_objective_from_string(const std::string& name) {
    if (name == "dimension") return MetaObjective::Dimension;
    if (name == "translation") return MetaObjective::Translation;
    throw std::invalid_argument("unknown meta-objective '" + name + "'");
}

std::size_t meta_subset_size(std::size_t archive_size, double fraction) {
    if (archive_size == 0) return 0;
    const auto k = static_cast<std::size_t>(std::floor(fraction * static_cast<double>(archive_size)));
    return std::clamp<std::size_t>(k, 1, archive_size);
}

std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t k, Rng& rng) {
    if (k > n) throw std::invalid_argument("cannot sample more items than available");
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    for (std::size_t i = 0; i < k; ++i) std::swap(idx[i], idx[i + uniform_index(rng, n - i)]);
    idx.resize(k);
    return idx;
}

double dimension_normaliser(std::size_t n_genes) {
    const double m = static_cast<double>(n_genes) - 1.0;
    return 10.0 * m + m * (kDomainHigh * kDomainHigh + 10.0);
}

double translation_normaliser(std::size_t n_genes) {
    const double n = static_cast<double>(n_genes);
    const double reach = kTranslationMaxSlope * kDomainHigh + kTranslationMaxShift;
    return 10.0 * n + n * (reach * reach + 10.0);
}

double dimension_meta_fitness_on(std::span<const Solution> subset, std::span<const std::size_t> dropped,
                                 EvaluationCounter* counter) {
    if (subset.empty()) throw std::logic_error("meta-fitness of an empty archive subset");
    if (dropped.empty()) throw std::invalid_argument("dimension meta-fitness needs at least one dropped index");
    const std::size_t n_genes = subset.front().genotype.size();
    const double bound = dimension_normaliser(n_genes);

    double quality = 0.0;
    for (const Solution& s : subset) {
        const SearchPoint x = decode(s.genotype);
        for (std::size_t j : dropped) quality += bound + eval_dimension_drop(x.coords, j);
    }
    if (counter) counter->add(subset.size() * dropped.size());
    quality /= static_cast<double>(dropped.size());

    double pairwise = 0.0;  // sum over ordered pairs g != g'
    for (std::size_t a = 0; a < subset.size(); ++a) {
        const auto& ga = subset[a].genotype.genes;
        for (std::size_t b = a + 1; b < subset.size(); ++b) {
            const auto& gb = subset[b].genotype.genes;
            double d2 = 0.0;
            for (std::size_t i = 0; i < ga.size(); ++i) {
                const double diff = ga[i] - gb[i];
                d2 += diff * diff;
            }
            pairwise += 2.0 * std::sqrt(d2);
        }
    }
    const double divisor = subset.size() > 1 ? static_cast<double>(subset.size() - 1) : 1.0;
    const double alpha = std::sqrt(static_cast<double>(n_genes)) * bound / divisor;
    return quality + alpha * pairwise;
}

double translation_meta_fitness_on(std::span<const Solution> subset, std::span<const Translation> translations,
                                   EvaluationCounter* counter) {
    if (subset.empty()) throw std::logic_error("meta-fitness of an empty archive subset");
    if (translations.empty()) throw std::invalid_argument("translation meta-fitness needs translations");
    const std::size_t n_genes = subset.front().genotype.size();
    const double bound = translation_normaliser(n_genes);
    double total = 0.0;
    for (const Solution& s : subset) {
        const SearchPoint x = decode(s.genotype);
        for (const Translation& t : translations) total += bound + eval_translation(x.coords, t.a, t.b);
    }
    if (counter) counter->add(subset.size() * translations.size());
    return 10.0 / (static_cast<double>(translations.size()) * static_cast<double>(n_genes)) * total;
}

namespace {

std::vector<Solution> draw_subset(std::span<const Solution> archive, double fraction, Rng& rng) {
    if (archive.empty()) throw std::logic_error("meta-fitness of an empty archive");
    const auto idx = sample_without_replacement(archive.size(), meta_subset_size(archive.size(), fraction), rng);
    std::vector<Solution> subset;
    subset.reserve(idx.size());
    for (std::size_t i : idx) subset.push_back(archive[i]);
    return subset;
}

}  // namespace

double meta_fitness_dimension(std::span<const Solution> archive, std::span<const std::size_t> dropped,
                              double subset_fraction, Rng& rng, EvaluationCounter* counter) {
    const auto subset = draw_subset(archive, subset_fraction, rng);
    return dimension_meta_fitness_on(subset, dropped, counter);
}

double meta_fitness_translation(std::span<const Solution> archive, double subset_fraction, Rng& rng,
                                EvaluationCounter* counter) {
    const auto translations = sample_translation_set(rng);
    const auto subset = draw_subset(archive, subset_fraction, rng);
    return translation_meta_fitness_on(subset, translations, counter);
}

std::uint64_t meta_fitness_cost(MetaObjective objective, std::size_t archive_size, double subset_fraction,
                                std::size_t dropped_count) {
    const std::uint64_t subset = meta_subset_size(archive_size, subset_fraction);
    return subset * (objective == MetaObjective::Dimension ? dropped_count : 16);
}

}  // namespace qdmeta
