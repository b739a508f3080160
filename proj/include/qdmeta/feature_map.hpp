#pragma once

// Neural feature-map: base-features in [0,1]^Nb -> target-features in (0,1)^Nt
// through one hidden layer of scaled sigmoids.

#include <cstddef>
#include <span>
#include <vector>

namespace qdmeta {

/// Flat weight vector of one feature-map; the unit the meta-optimiser evolves.
using MetaGenotype = std::vector<double>;

inline constexpr double kDefaultSigmoidScale = 30.0;

struct NetworkDims {
    std::size_t base = 20;
    std::size_t hidden = 10;
    std::size_t target = 2;

    /// hidden*base + target*hidden + 2 (one shared bias per layer).
    std::size_t genotype_size() const { return hidden * base + target * hidden + 2; }
    bool operator==(const NetworkDims&) const = default;
};

struct FeatureMapNetwork {
    NetworkDims dims;
    std::vector<double> w1;  // hidden x base, row-major
    std::vector<double> w2;  // target x hidden, row-major
    double b1 = 0.0;
    double b2 = 0.0;
    double alpha_s = kDefaultSigmoidScale;
};

/// Clamps every component to [-1,1] and unpacks W1, W2, B1, B2 in that order.
/// Throws std::invalid_argument on a length mismatch.
FeatureMapNetwork transform(std::span<const double> w, NetworkDims dims, double alpha_s = kDefaultSigmoidScale);

/// 1 / (1 + exp(-alpha_s x / (n + 1))).
double scaled_sigmoid(double x, std::size_t n, double alpha_s);
std::vector<double> scaled_sigmoid(std::span<const double> x, std::size_t n, double alpha_s);

/// Writes target-features of `base` into `out` (length dims.target).
void map_features(const FeatureMapNetwork& net, std::span<const double> base, std::span<double> out);
std::vector<double> map_features(const FeatureMapNetwork& net, std::span<const double> base);

}  // namespace qdmeta
