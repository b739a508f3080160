#pragma once

// (mu/mu_W, lambda)-CMA-ES with cumulative step-size adaptation and
// rank-one + rank-mu covariance updates. Maximises.

#include <Eigen/Dense>

#include <cstddef>
#include <string>
#include <vector>

#include "qdmeta/rng.hpp"

namespace qdmeta {

struct CmaConstants {
    std::size_t mu = 0;
    std::vector<double> weights;  // positive, non-increasing, sum to 1
    double mu_eff = 0.0;
    double c_sigma = 0.0;
    double d_sigma = 0.0;
    double c_c = 0.0;
    double c_1 = 0.0;
    double c_mu = 0.0;
    double chi_n = 0.0;
};

struct CmaState {
    std::size_t dim = 0;
    std::size_t lambda = 0;
    Eigen::VectorXd mean;
    Eigen::MatrixXd cov;
    double sigma = 1.0;
    Eigen::VectorXd p_sigma;
    Eigen::VectorXd p_c;
    CmaConstants constants;
    std::size_t generation = 0;

    // Cached decomposition cov = B diag(D^2) B^T, refreshed lazily.
    Eigen::MatrixXd basis;
    Eigen::VectorXd scales;
    std::size_t eigen_generation = 0;

    /// Generations between eigen-decompositions: ceil(1 / (10 dim (c_1 + c_mu))).
    std::size_t eigen_interval() const;
};

/// Default strategy constants for (dim, lambda). lambda = 1 degenerates to a
/// (1,1) strategy with unit weight.
CmaConstants default_constants(std::size_t dim, std::size_t lambda);

/// Throws std::invalid_argument on dim == 0, lambda == 0, sigma0 <= 0 or a mean of the wrong size.
CmaState cma_init(std::size_t dim, std::size_t lambda, double sigma0, const std::vector<double>& m0);

/// lambda draws of m + sigma * N(0, C).
std::vector<std::vector<double>> cma_sample(const CmaState& state, Rng& rng);

/// Ranks samples by fitness (descending; ties by index) and adapts mean, paths,
/// covariance and step size. Throws std::invalid_argument on NaN fitness or a size mismatch.
void cma_update(CmaState& state, const std::vector<std::vector<double>>& samples, const std::vector<double>& fitness);

/// Recomputes the eigen-decomposition; eigenvalues are floored at 1e-14 * max.
void cma_refresh_decomposition(CmaState& state);

std::string cma_to_json(const CmaState& state);
CmaState cma_from_json(const std::string& text);

}  // namespace qdmeta
