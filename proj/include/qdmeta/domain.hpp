#pragma once

// Rastrigin landscape, the normalised genotype encoding, and the landscape
// perturbations used by the meta-objectives and the test phase.

#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "qdmeta/rng.hpp"

namespace qdmeta {

inline constexpr std::size_t kDefaultGenes = 20;
inline constexpr double kDomainLow = -5.12;
inline constexpr double kDomainHigh = 5.12;
inline constexpr double kDomainWidth = kDomainHigh - kDomainLow;

// Ranges of the translations sampled during meta-evolution: |a| in
// [kMinSlope, kMaxSlope], |b| <= kMaxShift.
inline constexpr double kTranslationMinSlope = 0.91;
inline constexpr double kTranslationMaxSlope = 1.10;
inline constexpr double kTranslationMaxShift = 0.50;

/// Normalised bottom-level search point; every gene lies in [0,1].
struct Genotype {
    std::vector<double> genes;

    Genotype() = default;
    explicit Genotype(std::vector<double> g);

    static Genotype random(std::size_t n_genes, Rng& rng);
    std::size_t size() const { return genes.size(); }
    bool operator==(const Genotype&) const = default;
};

/// Point of the Rastrigin evaluation domain [-5.12, 5.12]^n.
struct SearchPoint {
    std::vector<double> coords;
};

SearchPoint decode(const Genotype& g);
Genotype encode(const SearchPoint& x);

double decode_gene(double gene);

/// Negated Rastrigin: -(10 n + sum(x_i^2 - 10 cos(2 pi x_i))). Maximum 0 at the origin.
double rastrigin(std::span<const double> x);

/// Rastrigin over every coordinate except `drop`.
double eval_dimension_drop(std::span<const double> x, std::size_t drop);

/// Rastrigin over coordinates outside `index_set`, with a 10 sin(6 pi x) term
/// replacing the coordinates inside it.
double eval_dimension_noise_test(std::span<const double> x, std::pair<std::size_t, std::size_t> index_set);

/// Rastrigin of the linearly transformed point a x + b (no re-clamping).
double eval_translation(std::span<const double> x, double a, double b);

struct BaseLandscape {
    bool operator==(const BaseLandscape&) const = default;
};
struct DimensionDrop {
    std::size_t index = 0;
    bool operator==(const DimensionDrop&) const = default;
};
struct DimensionNoise {
    std::size_t first = 0;
    std::size_t second = 1;
    bool operator==(const DimensionNoise&) const = default;
};
struct Translation {
    double a = 1.0;
    double b = 0.0;
    bool operator==(const Translation&) const = default;
};

using Landscape = std::variant<BaseLandscape, DimensionDrop, DimensionNoise, Translation>;

/// Throws std::invalid_argument when the landscape is invalid for `n_genes`.
void validate(const Landscape& landscape, std::size_t n_genes);
double evaluate(const Landscape& landscape, std::span<const double> x);
std::string describe(const Landscape& landscape);

/// Sixteen translations: two draws from each of the eight ranges given by the
/// sign of a, shrink vs expand, and the sign of b.
std::vector<Translation> sample_translation_set(Rng& rng);

/// The range (octant) a translation belongs to, in [0, 8).
int translation_octant(const Translation& t);

/// `count` distinct unordered index pairs sampled without replacement.
std::vector<DimensionNoise> generate_dimension_test_suite(Rng& rng, std::size_t n_genes = kDefaultGenes,
                                                          std::size_t count = 120);

/// Twelve slopes (a' in {0.01, 0.25, 0.5}; shrink 1-a' or expand 1+a'; with or
/// without reversal) crossed with ten intercepts +-{0.01, 0.25, 0.5, 0.75, 1}.
std::vector<Translation> generate_translation_test_suite();

}  // namespace qdmeta
