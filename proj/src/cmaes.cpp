#include "qdmeta/cmaes.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include <json.hpp>

namespace qdmeta {

std::size_t CmaState::eigen_interval() const {
    const double rate = constants.c_1 + constants.c_mu;
    if (rate <= 0.0) return 0;  // never needed: the covariance cannot change
    return static_cast<std::size_t>(std::ceil(1.0 / (10.0 * static_cast<double>(dim) * rate)));
}

CmaConstants default_constants(std::size_t dim, std::size_t lambda) {
    CmaConstants k;
    const double n = static_cast<double>(dim);
    k.mu = std::max<std::size_t>(1, lambda / 2);
    k.weights.resize(k.mu);
    if (k.mu == 1) {
        k.weights[0] = 1.0;
    } else {
        for (std::size_t i = 0; i < k.mu; ++i) {
            k.weights[i] = std::log((static_cast<double>(lambda) + 1.0) / 2.0) - std::log(static_cast<double>(i + 1));
        }
        const double total = std::accumulate(k.weights.begin(), k.weights.end(), 0.0);
        for (double& w : k.weights) w /= total;
    }
    double sq = 0.0;
    for (double w : k.weights) sq += w * w;
    k.mu_eff = 1.0 / sq;
    k.c_sigma = (k.mu_eff + 2.0) / (n + k.mu_eff + 5.0);
    k.d_sigma = 1.0 + 2.0 * std::max(0.0, std::sqrt((k.mu_eff - 1.0) / (n + 1.0)) - 1.0) + k.c_sigma;
    k.c_c = (4.0 + k.mu_eff / n) / (n + 4.0 + 2.0 * k.mu_eff / n);
    k.c_1 = 2.0 / ((n + 1.3) * (n + 1.3) + k.mu_eff);
    k.c_mu = std::min(1.0 - k.c_1, 2.0 * (k.mu_eff - 2.0 + 1.0 / k.mu_eff) / ((n + 2.0) * (n + 2.0) + k.mu_eff));
    k.c_mu = std::max(0.0, k.c_mu);
    k.chi_n = std::sqrt(n) * (1.0 - 1.0 / (4.0 * n) + 1.0 / (21.0 * n * n));
    return k;
}

CmaState cma_init(std::size_t dim, std::size_t lambda, double sigma0, const std::vector<double>& m0) {
    if (dim == 0) throw std::invalid_argument("CMA-ES dimension must be positive");
    if (lambda == 0) throw std::invalid_argument("CMA-ES population size must be positive");
    if (!(sigma0 > 0.0)) throw std::invalid_argument("CMA-ES initial step size must be positive");
    if (m0.size() != dim) throw std::invalid_argument("CMA-ES initial mean has the wrong dimension");
    CmaState s;
    s.dim = dim;
    s.lambda = lambda;
    s.mean = Eigen::Map<const Eigen::VectorXd>(m0.data(), static_cast<Eigen::Index>(dim));
    s.cov = Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
    s.sigma = sigma0;
    s.p_sigma = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dim));
    s.p_c = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dim));
    s.constants = default_constants(dim, lambda);
    s.basis = Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
    s.scales = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(dim));
    return s;
}

std::vector<std::vector<double>> cma_sample(const CmaState& state, Rng& rng) {
    const auto n = static_cast<Eigen::Index>(state.dim);
    std::vector<std::vector<double>> out(state.lambda);
    Eigen::VectorXd z(n);
    for (auto& x : out) {
        for (Eigen::Index i = 0; i < n; ++i) z[i] = standard_normal(rng);
        Eigen::VectorXd y = state.basis * state.scales.cwiseProduct(z);
        Eigen::VectorXd v = state.mean + state.sigma * y;
        x.assign(v.data(), v.data() + n);
    }
    return out;
}

void cma_refresh_decomposition(CmaState& state) {
    state.cov = 0.5 * (state.cov + state.cov.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(state.cov);
    if (solver.info() != Eigen::Success) throw std::runtime_error("CMA-ES eigen-decomposition failed");
    Eigen::VectorXd eig = solver.eigenvalues();
    const double floor = 1e-14 * std::max(eig.maxCoeff(), 1e-300);
    bool floored = false;
    for (Eigen::Index i = 0; i < eig.size(); ++i) {
        if (eig[i] < floor) {
            eig[i] = floor;
            floored = true;
        }
    }
    state.basis = solver.eigenvectors();
    state.scales = eig.cwiseSqrt();
    if (floored) {
        state.cov = state.basis * eig.asDiagonal() * state.basis.transpose();
        state.cov = 0.5 * (state.cov + state.cov.transpose()).eval();
    }
    state.eigen_generation = state.generation;
}

void cma_update(CmaState& state, const std::vector<std::vector<double>>& samples, const std::vector<double>& fitness) {
    if (samples.size() != state.lambda || fitness.size() != state.lambda) {
        throw std::invalid_argument("CMA-ES update expects exactly lambda samples and fitnesses");
    }
    for (double f : fitness) {
        if (std::isnan(f)) throw std::invalid_argument("CMA-ES update received a NaN fitness");
    }
    for (const auto& x : samples) {
        if (x.size() != state.dim) throw std::invalid_argument("CMA-ES sample has the wrong dimension");
    }
    const auto n = static_cast<Eigen::Index>(state.dim);
    const CmaConstants& k = state.constants;

    std::vector<std::size_t> rank(state.lambda);
    std::iota(rank.begin(), rank.end(), std::size_t{0});
    std::stable_sort(rank.begin(), rank.end(), [&](std::size_t a, std::size_t b) { return fitness[a] > fitness[b]; });

    const Eigen::VectorXd old_mean = state.mean;
    Eigen::MatrixXd steps(n, static_cast<Eigen::Index>(k.mu));
    Eigen::VectorXd new_mean = Eigen::VectorXd::Zero(n);
    for (std::size_t i = 0; i < k.mu; ++i) {
        Eigen::Map<const Eigen::VectorXd> x(samples[rank[i]].data(), n);
        steps.col(static_cast<Eigen::Index>(i)) = (x - old_mean) / state.sigma;
        new_mean += k.weights[i] * x;
    }
    state.mean = new_mean;
    const Eigen::VectorXd y_w = (new_mean - old_mean) / state.sigma;

    // C^{-1/2} y_w = B D^{-1} B^T y_w
    const Eigen::VectorXd whitened = state.basis * (state.basis.transpose() * y_w).cwiseQuotient(state.scales);
    state.p_sigma = (1.0 - k.c_sigma) * state.p_sigma + std::sqrt(k.c_sigma * (2.0 - k.c_sigma) * k.mu_eff) * whitened;

    const double decay = 1.0 - std::pow(1.0 - k.c_sigma, 2.0 * static_cast<double>(state.generation + 1));
    const double ps_norm = state.p_sigma.norm();
    const bool h_sigma =
        decay <= 0.0 || ps_norm / std::sqrt(decay) / k.chi_n < 1.4 + 2.0 / (static_cast<double>(state.dim) + 1.0);
    const double h = h_sigma ? 1.0 : 0.0;
    state.p_c = (1.0 - k.c_c) * state.p_c + h * std::sqrt(k.c_c * (2.0 - k.c_c) * k.mu_eff) * y_w;

    if (k.c_1 > 0.0 || k.c_mu > 0.0) {
        const double c1a = k.c_1 * (1.0 - (1.0 - h * h) * k.c_c * (2.0 - k.c_c));
        Eigen::MatrixXd rank_mu = Eigen::MatrixXd::Zero(n, n);
        for (std::size_t i = 0; i < k.mu; ++i) {
            auto col = steps.col(static_cast<Eigen::Index>(i));
            rank_mu.noalias() += k.weights[i] * col * col.transpose();
        }
        state.cov = (1.0 - c1a - k.c_mu) * state.cov + k.c_1 * state.p_c * state.p_c.transpose() + k.c_mu * rank_mu;
        state.cov = 0.5 * (state.cov + state.cov.transpose()).eval();
    }

    if (k.c_sigma > 0.0) state.sigma *= std::exp((k.c_sigma / k.d_sigma) * (ps_norm / k.chi_n - 1.0));
    ++state.generation;

    const std::size_t interval = state.eigen_interval();
    if (interval > 0 && state.generation - state.eigen_generation >= interval) cma_refresh_decomposition(state);
}

namespace {

std::vector<double> to_vec(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

std::vector<double> to_vec(const Eigen::MatrixXd& m) { return {m.data(), m.data() + m.size()}; }

Eigen::VectorXd vec_from(const nlohmann::json& j, std::size_t n) {
    auto v = j.get<std::vector<double>>();
    if (v.size() != n) throw std::runtime_error("CMA-ES checkpoint: vector length mismatch");
    return Eigen::Map<Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(n));
}

Eigen::MatrixXd mat_from(const nlohmann::json& j, std::size_t n) {
    auto v = j.get<std::vector<double>>();
    if (v.size() != n * n) throw std::runtime_error("CMA-ES checkpoint: matrix size mismatch");
    return Eigen::Map<Eigen::MatrixXd>(v.data(), static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
}

}  // namespace

std::string cma_to_json(const CmaState& s) {
    nlohmann::json j;
    j["dim"] = s.dim;
    j["lambda"] = s.lambda;
    j["mean"] = to_vec(s.mean);
    j["cov"] = to_vec(s.cov);
    j["sigma"] = s.sigma;
    j["p_sigma"] = to_vec(s.p_sigma);
    j["p_c"] = to_vec(s.p_c);
    j["generation"] = s.generation;
    j["basis"] = to_vec(s.basis);
    j["scales"] = to_vec(s.scales);
    j["eigen_generation"] = s.eigen_generation;
    const CmaConstants& k = s.constants;
    j["constants"] = {{"mu", k.mu},       {"weights", k.weights}, {"mu_eff", k.mu_eff}, {"c_sigma", k.c_sigma},
                      {"d_sigma", k.d_sigma}, {"c_c", k.c_c},     {"c_1", k.c_1},       {"c_mu", k.c_mu},
                      {"chi_n", k.chi_n}};
    return j.dump();
}

CmaState cma_from_json(const std::string& text) {
    const auto j = nlohmann::json::parse(text);
    CmaState s;
    s.dim = j.at("dim").get<std::size_t>();
    s.lambda = j.at("lambda").get<std::size_t>();
    s.mean = vec_from(j.at("mean"), s.dim);
    s.cov = mat_from(j.at("cov"), s.dim);
    s.sigma = j.at("sigma").get<double>();
    s.p_sigma = vec_from(j.at("p_sigma"), s.dim);
    s.p_c = vec_from(j.at("p_c"), s.dim);
    s.generation = j.at("generation").get<std::size_t>();
    s.basis = mat_from(j.at("basis"), s.dim);
    s.scales = vec_from(j.at("scales"), s.dim);
    s.eigen_generation = j.at("eigen_generation").get<std::size_t>();
    const auto& c = j.at("constants");
    CmaConstants& k = s.constants;
    k.mu = c.at("mu").get<std::size_t>();
    k.weights = c.at("weights").get<std::vector<double>>();
    k.mu_eff = c.at("mu_eff").get<double>();
    k.c_sigma = c.at("c_sigma").get<double>();
    k.d_sigma = c.at("d_sigma").get<double>();
    k.c_c = c.at("c_c").get<double>();
    k.c_1 = c.at("c_1").get<double>();
    k.c_mu = c.at("c_mu").get<double>();
    k.chi_n = c.at("chi_n").get<double>();
    return s;
}

}  // namespace qdmeta
