#pragma once

// SARSA(lambda) control of the number of ME generations per meta-generation.
// States are leaves of a tree over the observation space; a leaf is split when
// the TD targets recorded on either side of a median threshold differ
// significantly under a two-sample Kolmogorov-Smirnov test.

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "qdmeta/rng.hpp"

namespace qdmeta {

inline constexpr std::size_t kObservationDims = 6;

struct Observation {
    double max_meta_fitness = 0.0;
    double mean_meta_fitness = 0.0;
    double std_meta_fitness = 0.0;
    double genotypic_diversity = 0.0;  // mean pairwise Euclidean distance of meta-genotypes
    int stagnation = 0;                // meta-generations without a new best meta-fitness
    double last_reward = 0.0;

    std::array<double, kObservationDims> as_array() const;
};

/// Admissible generations-per-meta-generation values, strictly increasing.
class ActionSet {
public:
    explicit ActionSet(std::vector<int> values = {5, 10, 25, 50, 100});
    std::size_t size() const { return values_.size(); }
    int value(std::size_t index) const { return values_.at(index); }
    const std::vector<int>& values() const { return values_; }

private:
    std::vector<int> values_;
};

struct Split {
    std::size_t dimension = 0;
    double threshold = 0.0;  // observation[dimension] < threshold goes left
    double statistic = 0.0;  // KS distance D
    double critical = 0.0;
};

struct SarsaParams {
    double alpha = 0.1;
    double gamma = 0.9;
    double lambda = 0.8;
};

class QTree {
public:
    struct Sample {
        std::array<double, kObservationDims> observation{};
        double target = 0.0;
    };

    struct Node {
        // Internal nodes: dimension/threshold and children; leaves: left == right == -1.
        std::size_t dimension = 0;
        double threshold = 0.0;
        int left = -1;
        int right = -1;
        std::vector<double> q;
        std::vector<double> e;
        std::vector<Sample> samples;
        std::size_t visits = 0;

        bool is_leaf() const { return left < 0; }
    };

    explicit QTree(std::size_t n_actions, std::size_t min_split_samples = 30, double significance = 0.05);

    std::size_t n_actions() const { return n_actions_; }
    std::size_t min_split_samples() const { return min_samples_; }

    /// Leaf id reached by axis-aligned threshold tests from the root.
    std::size_t discretise(const Observation& obs) const;
    std::size_t discretise(const std::array<double, kObservationDims>& obs) const;

    std::vector<std::size_t> leaves() const;
    std::size_t leaf_count() const;

    const Node& node(std::size_t id) const { return nodes_.at(id); }
    double q(std::size_t leaf, std::size_t action) const;
    double& q(std::size_t leaf, std::size_t action);
    double eligibility(std::size_t leaf, std::size_t action) const;
    double total_eligibility() const;

    /// Applies one SARSA(lambda) step and returns the TD target r + gamma Q(s',a').
    double sarsa_update(std::size_t s, std::size_t a, double r, std::size_t s_next, std::size_t a_next,
                        const SarsaParams& params);

    void record_sample(std::size_t leaf, const Observation& obs, double target);

    /// Best KS split of a leaf across all observation dimensions, if significant.
    std::optional<Split> consider_split(std::size_t leaf) const;
    /// Turns `leaf` into an internal node; children inherit the Q-row and traces.
    void apply_split(std::size_t leaf, const Split& split);

    const std::vector<Node>& nodes() const { return nodes_; }
    std::vector<Node>& mutable_nodes() { return nodes_; }
    double significance() const { return significance_; }

private:
    std::size_t n_actions_;
    std::size_t min_samples_;
    double significance_;
    std::vector<Node> nodes_;
};

/// max(0, (new - prev) / |prev|) / evals, or max(0, new - prev) / evals when prev == 0.
/// Throws std::invalid_argument for evals <= 0.
double compute_reward(double prev_max, double new_max, long long evals_spent);

/// Greedy action with probability 1 - epsilon (ties -> lowest index), else uniform.
std::size_t epsilon_greedy(const QTree& tree, std::size_t state, Rng& rng, double epsilon);

/// Two-sample Kolmogorov-Smirnov statistic sup |F1 - F2|.
double ks_statistic(std::vector<double> a, std::vector<double> b);
/// Asymptotic critical value c(alpha) sqrt((n + m) / (n m)).
double ks_critical_value(std::size_t n, std::size_t m, double significance);

struct ControlConfig {
    bool enabled = true;
    std::vector<int> actions{5, 10, 25, 50, 100};
    int fixed_generations = 10;
    SarsaParams sarsa;
    double epsilon = 0.1;
    std::size_t min_split_samples = 30;
    double significance = 0.05;
};

/// Drives generations-per-meta-generation across a run. In static mode it
/// always returns the fixed value and consumes no randomness.
class GenerationController {
public:
    explicit GenerationController(ControlConfig config);

    /// Chooses the action for the upcoming meta-generation from the current
    /// observation and, when a previous transition exists, applies the SARSA
    /// update for it (reward recorded by `finish`).
    int choose(const Observation& obs, Rng& rng);

    /// Records the reward earned by the action returned from the last `choose`.
    void finish(double reward);

    const ControlConfig& config() const { return config_; }
    const QTree& tree() const { return tree_; }
    /// Leaf id of the observation passed to the last `choose`.
    std::size_t last_state() const { return last_state_; }

    std::string to_json() const;
    static GenerationController from_json(const std::string& text, ControlConfig config);

private:
    ControlConfig config_;
    ActionSet actions_;
    QTree tree_;
    bool has_previous_ = false;
    Observation previous_obs_{};
    std::size_t previous_action_ = 0;
    double previous_reward_ = 0.0;
    std::size_t last_state_ = 0;
    bool pending_ = false;
    Observation pending_obs_{};
    std::size_t pending_action_ = 0;
};

}  // namespace qdmeta
