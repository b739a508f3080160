#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "qdmeta/archive.hpp"

namespace qdmeta {

namespace {

// Samples are stored column-wise (dim x n).
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic>;

constexpr Eigen::Index kBlock = 2048;

/// Nearest-centroid assignment of every sample; returns the total squared distance.
double assign(const Matrix& samples, const Matrix& centroids, std::vector<std::size_t>& labels) {
    const Eigen::Index n = samples.cols();
    const Eigen::Index k = centroids.cols();
    const Eigen::VectorXd c_norm = centroids.colwise().squaredNorm().transpose();
    double objective = 0.0;
    Matrix cross;
    for (Eigen::Index start = 0; start < n; start += kBlock) {
        const Eigen::Index len = std::min(kBlock, n - start);
        cross.noalias() = centroids.transpose() * samples.middleCols(start, len);
        for (Eigen::Index j = 0; j < len; ++j) {
            // |x - c|^2 - |x|^2 = |c|^2 - 2 x.c ; the argmin is the same.
            Eigen::Index best = 0;
            double best_v = std::numeric_limits<double>::infinity();
            for (Eigen::Index c = 0; c < k; ++c) {
                double v = c_norm[c] - 2.0 * cross(c, j);
                if (v < best_v) {
                    best_v = v;
                    best = c;
                }
            }
            labels[static_cast<std::size_t>(start + j)] = static_cast<std::size_t>(best);
            objective += (samples.col(start + j) - centroids.col(best)).squaredNorm();
        }
    }
    return objective;
}

KMeansResult lloyd(const Matrix& samples, std::size_t k, Rng& rng, int max_iterations, double tol) {
    const auto n = static_cast<std::size_t>(samples.cols());
    const auto dim = samples.rows();
    if (k == 0) throw std::invalid_argument("k-means needs k >= 1");
    if (k > n) throw std::invalid_argument("k-means needs k <= number of samples");

    // Uniform random subset of the samples as the initial centroids.
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    for (std::size_t i = 0; i < k; ++i) std::swap(order[i], order[i + uniform_index(rng, n - i)]);
    Matrix centroids(dim, static_cast<Eigen::Index>(k));
    for (std::size_t c = 0; c < k; ++c) centroids.col(static_cast<Eigen::Index>(c)) = samples.col(static_cast<Eigen::Index>(order[c]));

    KMeansResult result;
    std::vector<std::size_t> labels(n);
    std::vector<std::size_t> counts(k);
    double previous = assign(samples, centroids, labels);
    result.objective_history.push_back(previous);
    for (int it = 0; it < max_iterations; ++it) {
        Matrix sums = Matrix::Zero(dim, static_cast<Eigen::Index>(k));
        std::fill(counts.begin(), counts.end(), 0);
        for (std::size_t i = 0; i < n; ++i) {
            sums.col(static_cast<Eigen::Index>(labels[i])) += samples.col(static_cast<Eigen::Index>(i));
            ++counts[labels[i]];
        }
        for (std::size_t c = 0; c < k; ++c) {
            // Empty clusters keep their previous centroid.
            if (counts[c] > 0) centroids.col(static_cast<Eigen::Index>(c)) = sums.col(static_cast<Eigen::Index>(c)) / static_cast<double>(counts[c]);
        }
        double objective = assign(samples, centroids, labels);
        result.objective_history.push_back(objective);
        result.iterations = it + 1;
        if (previous - objective <= tol * previous) break;
        previous = objective;
    }

    result.centroids.resize(k);
    for (std::size_t c = 0; c < k; ++c) {
        auto col = centroids.col(static_cast<Eigen::Index>(c));
        result.centroids[c].assign(col.data(), col.data() + dim);
    }
    return result;
}

}  // namespace

KMeansResult kmeans(const std::vector<std::vector<double>>& samples, std::size_t k, Rng& rng, int max_iterations,
                    double relative_tolerance) {
    if (samples.empty()) throw std::invalid_argument("k-means needs samples");
    const auto dim = static_cast<Eigen::Index>(samples.front().size());
    Matrix m(dim, static_cast<Eigen::Index>(samples.size()));
    for (std::size_t i = 0; i < samples.size(); ++i) {
        if (static_cast<Eigen::Index>(samples[i].size()) != dim) throw std::invalid_argument("ragged samples");
        m.col(static_cast<Eigen::Index>(i)) = Eigen::Map<const Eigen::VectorXd>(samples[i].data(), dim);
    }
    return lloyd(m, k, rng, max_iterations, relative_tolerance);
}

KMeansResult kmeans_uniform(std::size_t k, std::size_t n_samples, std::size_t dim, Rng& rng, int max_iterations,
                            double relative_tolerance) {
    if (k > n_samples) throw std::invalid_argument("k-means needs k <= number of samples");
    Matrix m(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(n_samples));
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
        for (Eigen::Index i = 0; i < m.rows(); ++i) m(i, j) = uniform01(rng);
    }
    return lloyd(m, k, rng, max_iterations, relative_tolerance);
}

std::vector<std::vector<double>> build_centroids(std::size_t k, std::size_t n_samples, std::size_t dim, Rng& rng) {
    return kmeans_uniform(k, n_samples, dim, rng).centroids;
}

}  // namespace qdmeta
