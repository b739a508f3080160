#include "qdmeta/domain.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace qdmeta {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kSixPi = 6.0 * std::numbers::pi;

double rastrigin_term(double x) { return x * x - 10.0 * std::cos(kTwoPi * x); }

}  // namespace

Genotype::Genotype(std::vector<double> g) : genes(std::move(g)) {
    for (double& v : genes) {
        if (!(v >= 0.0 && v <= 1.0)) {
            throw std::invalid_argument("genotype gene outside [0,1]");
        }
    }
}

Genotype Genotype::random(std::size_t n_genes, Rng& rng) {
    Genotype g;
    g.genes.resize(n_genes);
    for (double& v : g.genes) v = uniform01(rng);
    return g;
}

double decode_gene(double gene) { return kDomainLow + kDomainWidth * gene; }

SearchPoint decode(const Genotype& g) {
    SearchPoint x;
    x.coords.resize(g.genes.size());
    std::transform(g.genes.begin(), g.genes.end(), x.coords.begin(), decode_gene);
    return x;
}

Genotype encode(const SearchPoint& x) {
    Genotype g;
    g.genes.resize(x.coords.size());
    std::transform(x.coords.begin(), x.coords.end(), g.genes.begin(),
                   [](double c) { return std::clamp((c - kDomainLow) / kDomainWidth, 0.0, 1.0); });
    return g;
}

double rastrigin(std::span<const double> x) {
    double sum = 0.0;
    for (double xi : x) sum += rastrigin_term(xi);
    return -(10.0 * static_cast<double>(x.size()) + sum);
}

double eval_dimension_drop(std::span<const double> x, std::size_t drop) {
    if (drop >= x.size()) throw std::out_of_range("dimension drop index out of range");
    double sum = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (i != drop) sum += rastrigin_term(x[i]);
    }
    return -(10.0 * static_cast<double>(x.size() - 1) + sum);
}

double eval_dimension_noise_test(std::span<const double> x, std::pair<std::size_t, std::size_t> index_set) {
    const auto [j0, j1] = index_set;
    if (j0 >= x.size() || j1 >= x.size()) throw std::out_of_range("noise index out of range");
    if (j0 == j1) throw std::invalid_argument("noise indices must be distinct");
    double kept = 0.0;
    double noise = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (i == j0 || i == j1) {
            noise += 10.0 * std::sin(kSixPi * x[i]);
        } else {
            kept += rastrigin_term(x[i]);
        }
    }
    return -(10.0 * static_cast<double>(x.size() - 2) + kept - noise);
}

double eval_translation(std::span<const double> x, double a, double b) {
    if (a == 0.0) throw std::invalid_argument("translation slope must be non-zero");
    double sum = 0.0;
    for (double xi : x) sum += rastrigin_term(a * xi + b);
    return -(10.0 * static_cast<double>(x.size()) + sum);
}

void validate(const Landscape& landscape, std::size_t n_genes) {
    std::visit(
        [n_genes](const auto& l) {
            using T = std::decay_t<decltype(l)>;
            if constexpr (std::is_same_v<T, DimensionDrop>) {
                if (l.index >= n_genes) throw std::invalid_argument("dimension drop index out of range");
            } else if constexpr (std::is_same_v<T, DimensionNoise>) {
                if (l.first >= n_genes || l.second >= n_genes)
                    throw std::invalid_argument("noise index out of range");
                if (l.first == l.second) throw std::invalid_argument("noise indices must be distinct");
            } else if constexpr (std::is_same_v<T, Translation>) {
                if (l.a == 0.0) throw std::invalid_argument("translation slope must be non-zero");
            }
        },
        landscape);
}

double evaluate(const Landscape& landscape, std::span<const double> x) {
    return std::visit(
        [x](const auto& l) -> double {
            using T = std::decay_t<decltype(l)>;
            if constexpr (std::is_same_v<T, BaseLandscape>) {
                return rastrigin(x);
            } else if constexpr (std::is_same_v<T, DimensionDrop>) {
                return eval_dimension_drop(x, l.index);
            } else if constexpr (std::is_same_v<T, DimensionNoise>) {
                return eval_dimension_noise_test(x, {l.first, l.second});
            } else {
                return eval_translation(x, l.a, l.b);
            }
        },
        landscape);
}

std::string describe(const Landscape& landscape) {
    std::ostringstream os;
    os.precision(17);
    std::visit(
        [&os](const auto& l) {
            using T = std::decay_t<decltype(l)>;
            if constexpr (std::is_same_v<T, BaseLandscape>) {
                os << "base";
            } else if constexpr (std::is_same_v<T, DimensionDrop>) {
                os << "drop(" << l.index << ")";
            } else if constexpr (std::is_same_v<T, DimensionNoise>) {
                os << "noise(" << l.first << ";" << l.second << ")";
            } else {
                os << "translation(" << l.a << ";" << l.b << ")";
            }
        },
        landscape);
    return os.str();
}

std::vector<Translation> sample_translation_set(Rng& rng) {
    std::vector<Translation> set;
    set.reserve(16);
    for (int octant = 0; octant < 8; ++octant) {
        const bool negative_a = (octant & 4) != 0;
        const bool shrink = (octant & 2) != 0;
        const bool negative_b = (octant & 1) != 0;
        for (int rep = 0; rep < 2; ++rep) {
            double magnitude =
                shrink ? uniform(rng, kTranslationMinSlope, 1.0) : uniform(rng, 1.0, kTranslationMaxSlope);
            double b = negative_b ? uniform(rng, -kTranslationMaxShift, 0.0) : uniform(rng, 0.0, kTranslationMaxShift);
            set.push_back({negative_a ? -magnitude : magnitude, b});
        }
    }
    return set;
}

int translation_octant(const Translation& t) {
    const int negative_a = t.a < 0.0 ? 4 : 0;
    const int shrink = std::abs(t.a) < 1.0 ? 2 : 0;
    const int negative_b = t.b < 0.0 ? 1 : 0;
    return negative_a | shrink | negative_b;
}

std::vector<DimensionNoise> generate_dimension_test_suite(Rng& rng, std::size_t n_genes, std::size_t count) {
    std::vector<DimensionNoise> pairs;
    for (std::size_t i = 0; i < n_genes; ++i) {
        for (std::size_t j = i + 1; j < n_genes; ++j) pairs.push_back({i, j});
    }
    if (count > pairs.size()) throw std::invalid_argument("not enough distinct index pairs");
    // Partial Fisher-Yates: the first `count` entries are a uniform sample without replacement.
    for (std::size_t i = 0; i < count; ++i) {
        std::size_t k = i + uniform_index(rng, pairs.size() - i);
        std::swap(pairs[i], pairs[k]);
    }
    pairs.resize(count);
    return pairs;
}

std::vector<Translation> generate_translation_test_suite() {
    static constexpr double kBaseSlopes[] = {0.01, 0.25, 0.50};
    static constexpr double kIntercepts[] = {0.01, 0.25, 0.50, 0.75, 1.0};
    std::vector<Translation> suite;
    suite.reserve(120);
    for (double base : kBaseSlopes) {
        for (bool shrink : {true, false}) {
            for (bool reverse : {false, true}) {
                double a = shrink ? 1.0 - base : 1.0 + base;
                if (reverse) a = -a;
                for (double magnitude : kIntercepts) {
                    suite.push_back({a, magnitude});
                    suite.push_back({a, -magnitude});
                }
            }
        }
    }
    return suite;
}

}  // namespace qdmeta
