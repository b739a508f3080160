#include "qdmeta/rl_control.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <json.hpp>

namespace qdmeta {

std::array<double, kObservationDims> Observation::as_array() const {
    return {max_meta_fitness, mean_meta_fitness, std_meta_fitness, genotypic_diversity,
            static_cast<double>(stagnation), last_reward};
}

ActionSet::ActionSet(std::vector<int> values) : values_(std::move(values)) {
    if (values_.empty()) throw std::invalid_argument("action set must not be empty");
    for (std::size_t i = 0; i < values_.size(); ++i) {
        if (values_[i] <= 0) throw std::invalid_argument("actions must be positive");
        if (i > 0 && values_[i] <= values_[i - 1]) throw std::invalid_argument("actions must be strictly increasing");
    }
}

QTree::QTree(std::size_t n_actions, std::size_t min_split_samples, double significance)
    : n_actions_(n_actions), min_samples_(min_split_samples), significance_(significance) {
    if (n_actions == 0) throw std::invalid_argument("Q-tree needs at least one action");
    Node root;
    root.q.assign(n_actions, 0.0);
    root.e.assign(n_actions, 0.0);
    nodes_.push_back(std::move(root));
}

std::size_t QTree::discretise(const std::array<double, kObservationDims>& obs) const {
    std::size_t id = 0;
    while (!nodes_[id].is_leaf()) {
        const Node& n = nodes_[id];
        id = static_cast<std::size_t>(obs[n.dimension] < n.threshold ? n.left : n.right);
    }
    return id;
}

std::size_t QTree::discretise(const Observation& obs) const { return discretise(obs.as_array()); }

std::vector<std::size_t> QTree::leaves() const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        if (nodes_[i].is_leaf()) out.push_back(i);
    }
    return out;
}

std::size_t QTree::leaf_count() const { return leaves().size(); }

double QTree::q(std::size_t leaf, std::size_t action) const { return nodes_.at(leaf).q.at(action); }
double& QTree::q(std::size_t leaf, std::size_t action) { return nodes_.at(leaf).q.at(action); }
double QTree::eligibility(std::size_t leaf, std::size_t action) const { return nodes_.at(leaf).e.at(action); }

double QTree::total_eligibility() const {
    double sum = 0.0;
    for (const Node& n : nodes_) {
        if (!n.is_leaf()) continue;
        for (double e : n.e) sum += e;
    }
    return sum;
}

double QTree::sarsa_update(std::size_t s, std::size_t a, double r, std::size_t s_next, std::size_t a_next,
                           const SarsaParams& params) {
    if (!nodes_.at(s).is_leaf() || !nodes_.at(s_next).is_leaf()) throw std::invalid_argument("SARSA states must be leaves");
    const double target = r + params.gamma * q(s_next, a_next);
    const double delta = target - q(s, a);
    nodes_[s].e.at(a) = 1.0;
    nodes_[s].visits += 1;
    const double decay = params.lambda * params.gamma;
    for (Node& n : nodes_) {
        if (!n.is_leaf()) continue;
        for (std::size_t i = 0; i < n_actions_; ++i) {
            n.q[i] += params.alpha * n.e[i] * delta;
            n.e[i] *= decay;
        }
    }
    return target;
}

void QTree::record_sample(std::size_t leaf, const Observation& obs, double target) {
    if (!nodes_.at(leaf).is_leaf()) throw std::invalid_argument("samples are recorded on leaves");
    nodes_[leaf].samples.push_back({obs.as_array(), target});
}

std::optional<Split> QTree::consider_split(std::size_t leaf) const {
    const Node& n = nodes_.at(leaf);
    if (!n.is_leaf() || n.samples.size() < min_samples_ || n.samples.size() < 2) return std::nullopt;
    std::optional<Split> best;
    std::vector<double> values(n.samples.size());
    for (std::size_t d = 0; d < kObservationDims; ++d) {
        for (std::size_t i = 0; i < n.samples.size(); ++i) values[i] = n.samples[i].observation[d];
        std::vector<double> sorted = values;
        std::sort(sorted.begin(), sorted.end());
        const std::size_t m = sorted.size();
        double threshold = m % 2 == 1 ? sorted[m / 2] : 0.5 * (sorted[m / 2 - 1] + sorted[m / 2]);
        std::vector<double> left, right;
        for (const Sample& s : n.samples) (s.observation[d] < threshold ? left : right).push_back(s.target);
        if (left.empty() || right.empty()) continue;
        const double crit = ks_critical_value(left.size(), right.size(), significance_);
        const double stat = ks_statistic(std::move(left), std::move(right));
        if (stat > crit && (!best || stat > best->statistic)) best = Split{d, threshold, stat, crit};
    }
    return best;
}

void QTree::apply_split(std::size_t leaf, const Split& split) {
    if (!nodes_.at(leaf).is_leaf()) throw std::invalid_argument("only leaves can be split");
    Node left, right;
    left.q = right.q = nodes_[leaf].q;
    left.e = right.e = nodes_[leaf].e;
    for (const Sample& s : nodes_[leaf].samples) {
        (s.observation[split.dimension] < split.threshold ? left : right).samples.push_back(s);
    }
    left.visits = left.samples.size();
    right.visits = right.samples.size();
    const int left_id = static_cast<int>(nodes_.size());
    nodes_.push_back(std::move(left));
    nodes_.push_back(std::move(right));
    Node& parent = nodes_[leaf];
    parent.dimension = split.dimension;
    parent.threshold = split.threshold;
    parent.left = left_id;
    parent.right = left_id + 1;
    parent.q.clear();
    parent.e.clear();
    parent.samples.clear();
}

double compute_reward(double prev_max, double new_max, long long evals_spent) {
    if (evals_spent <= 0) throw std::invalid_argument("reward needs a positive evaluation count");
    const double gain = new_max - prev_max;
    const double ratio = prev_max != 0.0 ? gain / std::abs(prev_max) : gain;
    return std::max(0.0, ratio) / static_cast<double>(evals_spent);
}

std::size_t epsilon_greedy(const QTree& tree, std::size_t state, Rng& rng, double epsilon) {
    if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw std::invalid_argument("epsilon must lie in [0,1]");
    // Both draws are always taken so the stream advances identically either way.
    const double u = uniform01(rng);
    const std::size_t random_action = uniform_index(rng, tree.n_actions());
    if (u < epsilon) return random_action;
    std::size_t best = 0;
    for (std::size_t a = 1; a < tree.n_actions(); ++a) {
        if (tree.q(state, a) > tree.q(state, best)) best = a;
    }
    return best;
}

double ks_statistic(std::vector<double> a, std::vector<double> b) {
    if (a.empty() || b.empty()) throw std::invalid_argument("KS statistic needs two non-empty samples");
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const double na = static_cast<double>(a.size());
    const double nb = static_cast<double>(b.size());
    std::size_t i = 0, j = 0;
    double d = 0.0;
    while (i < a.size() && j < b.size()) {
        const double x = std::min(a[i], b[j]);
        while (i < a.size() && a[i] <= x) ++i;
        while (j < b.size() && b[j] <= x) ++j;
        d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
    }
    return d;
}

double ks_critical_value(std::size_t n, std::size_t m, double significance) {
    const double c = std::sqrt(-0.5 * std::log(significance / 2.0));
    const double dn = static_cast<double>(n);
    const double dm = static_cast<double>(m);
    return c * std::sqrt((dn + dm) / (dn * dm));
}

// --- controller -------------------------------------------------------------

GenerationController::GenerationController(ControlConfig config)
    : config_(std::move(config)),
      actions_(config_.actions),
      tree_(actions_.size(), config_.min_split_samples, config_.significance) {
    if (config_.fixed_generations <= 0) throw std::invalid_argument("fixed generations must be positive");
}

int GenerationController::choose(const Observation& obs, Rng& rng) {
    if (!config_.enabled) {
        last_state_ = 0;
        return config_.fixed_generations;
    }
    const std::size_t state = tree_.discretise(obs);
    const std::size_t action = epsilon_greedy(tree_, state, rng, config_.epsilon);
    if (has_previous_) {
        const std::size_t prev_state = tree_.discretise(previous_obs_);
        const double target =
            tree_.sarsa_update(prev_state, previous_action_, previous_reward_, state, action, config_.sarsa);
        tree_.record_sample(prev_state, previous_obs_, target);
        if (auto split = tree_.consider_split(prev_state)) tree_.apply_split(prev_state, *split);
    }
    pending_ = true;
    pending_obs_ = obs;
    pending_action_ = action;
    last_state_ = tree_.discretise(obs);
    return actions_.value(action);
}

void GenerationController::finish(double reward) {
    if (!config_.enabled) return;
    if (!pending_) throw std::logic_error("finish() without a preceding choose()");
    has_previous_ = true;
    previous_obs_ = pending_obs_;
    previous_action_ = pending_action_;
    previous_reward_ = reward;
    pending_ = false;
}

namespace {

nlohmann::json obs_json(const Observation& o) {
    return {o.max_meta_fitness, o.mean_meta_fitness, o.std_meta_fitness, o.genotypic_diversity, o.stagnation,
            o.last_reward};
}

Observation obs_from(const nlohmann::json& j) {
    Observation o;
    o.max_meta_fitness = j.at(0).get<double>();
    o.mean_meta_fitness = j.at(1).get<double>();
    o.std_meta_fitness = j.at(2).get<double>();
    o.genotypic_diversity = j.at(3).get<double>();
    o.stagnation = j.at(4).get<int>();
    o.last_reward = j.at(5).get<double>();
    return o;
}

}  // namespace

std::string GenerationController::to_json() const {
    nlohmann::json j;
    j["has_previous"] = has_previous_;
    j["previous_obs"] = obs_json(previous_obs_);
    j["previous_action"] = previous_action_;
    j["previous_reward"] = previous_reward_;
    j["last_state"] = last_state_;
    j["pending"] = pending_;
    j["pending_obs"] = obs_json(pending_obs_);
    j["pending_action"] = pending_action_;
    nlohmann::json nodes = nlohmann::json::array();
    for (const auto& n : tree_.nodes()) {
        nlohmann::json samples = nlohmann::json::array();
        for (const auto& s : n.samples) samples.push_back({{"obs", s.observation}, {"target", s.target}});
        nodes.push_back({{"dimension", n.dimension},
                         {"threshold", n.threshold},
                         {"left", n.left},
                         {"right", n.right},
                         {"q", n.q},
                         {"e", n.e},
                         {"visits", n.visits},
                         {"samples", samples}});
    }
    j["nodes"] = nodes;
    return j.dump();
}

GenerationController GenerationController::from_json(const std::string& text, ControlConfig config) {
    const auto j = nlohmann::json::parse(text);
    GenerationController c(std::move(config));
    c.has_previous_ = j.at("has_previous").get<bool>();
    c.previous_obs_ = obs_from(j.at("previous_obs"));
    c.previous_action_ = j.at("previous_action").get<std::size_t>();
    c.previous_reward_ = j.at("previous_reward").get<double>();
    c.last_state_ = j.at("last_state").get<std::size_t>();
    c.pending_ = j.at("pending").get<bool>();
    c.pending_obs_ = obs_from(j.at("pending_obs"));
    c.pending_action_ = j.at("pending_action").get<std::size_t>();
    auto& nodes = c.tree_.mutable_nodes();
    nodes.clear();
    for (const auto& jn : j.at("nodes")) {
        QTree::Node n;
        n.dimension = jn.at("dimension").get<std::size_t>();
        n.threshold = jn.at("threshold").get<double>();
        n.left = jn.at("left").get<int>();
        n.right = jn.at("right").get<int>();
        n.q = jn.at("q").get<std::vector<double>>();
        n.e = jn.at("e").get<std::vector<double>>();
        n.visits = jn.at("visits").get<std::size_t>();
        for (const auto& js : jn.at("samples")) {
            QTree::Sample s;
            s.observation = js.at("obs").get<std::array<double, kObservationDims>>();
            s.target = js.at("target").get<double>();
            n.samples.push_back(s);
        }
        nodes.push_back(std::move(n));
    }
    return c;
}

}  // namespace qdmeta
