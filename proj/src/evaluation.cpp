#include "qdmeta/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "qdmeta/parallel.hpp"

namespace qdmeta {

AdaptationCurve adaptation_test(std::span<const Solution> archive, const Landscape& landscape, std::size_t budget,
                                Rng& rng) {
    if (archive.empty()) throw std::logic_error("adaptation test on an empty archive");
    if (budget == 0) throw std::invalid_argument("adaptation test budget must be at least 1");
    const std::size_t n_eval = std::min(budget, archive.size());
    AdaptationCurve curve;
    curve.evaluated = sample_without_replacement(archive.size(), n_eval, rng);
    curve.best_so_far.reserve(budget);
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t idx : curve.evaluated) {
        const SearchPoint x = decode(archive[idx].genotype);
        best = std::max(best, evaluate(landscape, x.coords));
        curve.best_so_far.push_back(best);
    }
    curve.best_so_far.resize(budget, best);
    return curve;
}

CurveSummary summarise_curves(std::span<const AdaptationCurve> curves) {
    CurveSummary s;
    s.n_curves = curves.size();
    if (curves.empty()) return s;
    const std::size_t len = curves.front().best_so_far.size();
    for (const auto& c : curves) {
        if (c.best_so_far.size() != len) throw std::invalid_argument("curves differ in length");
    }
    s.mean.assign(len, 0.0);
    s.standard_error.assign(len, 0.0);
    const double n = static_cast<double>(curves.size());
    for (std::size_t k = 0; k < len; ++k) {
        double sum = 0.0;
        for (const auto& c : curves) sum += c.best_so_far[k];
        const double mean = sum / n;
        s.mean[k] = mean;
        if (curves.size() > 1) {
            double ss = 0.0;
            for (const auto& c : curves) ss += (c.best_so_far[k] - mean) * (c.best_so_far[k] - mean);
            s.standard_error[k] = std::sqrt(ss / (n - 1.0)) / std::sqrt(n);
        }
    }
    return s;
}

SuiteResult run_test_suite(std::span<const Solution> archive, std::span<const Landscape> suite, std::size_t budget,
                           Rng& rng, std::size_t workers) {
    if (suite.empty()) throw std::invalid_argument("test suite must not be empty");
    const std::uint64_t base = rng();
    SuiteResult result;
    result.curves.resize(suite.size());
    parallel_for(suite.size(), workers, [&](std::size_t i) {
        Rng scenario_rng = make_stream(base, "scenario", i);
        result.curves[i] = adaptation_test(archive, suite[i], budget, scenario_rng);
        result.curves[i].scenario_id = i;
    });
    result.summary = summarise_curves(result.curves);
    return result;
}

std::vector<Landscape> dimension_test_landscapes(Rng& rng, std::size_t n_genes) {
    std::vector<Landscape> out;
    for (const auto& p : generate_dimension_test_suite(rng, n_genes)) out.emplace_back(p);
    return out;
}

std::vector<Landscape> translation_test_landscapes() {
    std::vector<Landscape> out;
    for (const auto& t : generate_translation_test_suite()) out.emplace_back(t);
    return out;
}

const MetaIndividual& select_best_meta_individual(std::span<const MetaIndividual> population) {
    if (population.empty()) throw std::invalid_argument("cannot select from an empty meta-population");
    const MetaIndividual* best = &population.front();
    for (const auto& ind : population) {
        if (ind.meta_fitness > best->meta_fitness ||
            (ind.meta_fitness == best->meta_fitness && ind.id < best->id)) {
            best = &ind;
        }
    }
    return *best;
}

}  // namespace qdmeta
