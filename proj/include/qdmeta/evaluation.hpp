#pragma once

// Test phase: budget-limited random search without replacement over a final
// archive on a perturbed landscape.

#include <cstddef>
#include <span>
#include <vector>

#include "qdmeta/archive.hpp"
#include "qdmeta/domain.hpp"
#include "qdmeta/meta_fitness.hpp"

namespace qdmeta {

struct AdaptationCurve {
    std::size_t scenario_id = 0;
    std::vector<double> best_so_far;  // index k holds the best after k+1 evaluations
    std::vector<std::size_t> evaluated;  // archive indices in evaluation order
};

/// Evaluates a uniformly random permutation of the archive, up to `budget`
/// solutions, on `landscape`; the curve is held constant once the archive is exhausted.
AdaptationCurve adaptation_test(std::span<const Solution> archive, const Landscape& landscape, std::size_t budget,
                                Rng& rng);

struct CurveSummary {
    std::vector<double> mean;
    std::vector<double> standard_error;  // sample sd / sqrt(n); 0 for a single curve
    std::size_t n_curves = 0;
};

/// Pointwise mean and standard error of equal-length curves.
CurveSummary summarise_curves(std::span<const AdaptationCurve> curves);

struct SuiteResult {
    std::vector<AdaptationCurve> curves;
    CurveSummary summary;
};

/// One curve per scenario, each on its own stream derived from one draw of `rng`.
SuiteResult run_test_suite(std::span<const Solution> archive, std::span<const Landscape> suite, std::size_t budget,
                           Rng& rng, std::size_t workers = 1);

std::vector<Landscape> dimension_test_landscapes(Rng& rng, std::size_t n_genes = kDefaultGenes);
std::vector<Landscape> translation_test_landscapes();

/// Highest meta-fitness; ties go to the lowest id. Throws std::invalid_argument when empty.
const MetaIndividual& select_best_meta_individual(std::span<const MetaIndividual> population);

}  // namespace qdmeta
