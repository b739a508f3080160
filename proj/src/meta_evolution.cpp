#include "qdmeta/meta_evolution.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "qdmeta/evaluation.hpp"
#include "qdmeta/parallel.hpp"

namespace qdmeta {

namespace fs = std::filesystem;
using nlohmann::json;

void MetaConfig::validate() const {
    auto require = [](bool ok, const char* what) {
        if (!ok) throw std::invalid_argument(what);
    };
    require(lambda >= 1, "lambda must be at least 1");
    require(dims.base >= 1 && dims.hidden >= 1 && dims.target >= 1, "network dimensions must be positive");
    require(init_population >= 1, "init_population must be positive");
    require(batch_size >= 1, "batch_size must be positive");
    require(bins_per_dim >= 1, "bins_per_dim must be positive");
    require(database_capacity >= 1, "database_capacity must be positive");
    require(variation.rate >= 0.0 && variation.rate <= 1.0, "mutation rate must lie in [0,1]");
    require(variation.sigma >= 0.0, "mutation sigma must be non-negative");
    require(subset_fraction > 0.0 && subset_fraction <= 1.0, "subset_fraction must lie in (0,1]");
    require(sigma0 > 0.0, "sigma0 must be positive");
    require(sigmoid_scale > 0.0, "sigmoid scale must be positive");
    require(workers >= 1, "workers must be at least 1");
    if (objective == MetaObjective::Dimension) {
        require(dropped_count >= 1 && dropped_count <= dims.base, "dropped_count must lie in [1, genes]");
    }
    std::size_t cells = 1;
    for (std::size_t d = 0; d < dims.target; ++d) {
        require(cells <= std::numeric_limits<std::size_t>::max() / bins_per_dim, "grid too large");
        cells *= bins_per_dim;
    }
    require(control.fixed_generations >= 1, "fixed generations must be positive");
    ActionSet check(control.actions);
    (void)check;
}

namespace {

json control_json(const ControlConfig& c) {
    return {{"enabled", c.enabled},
            {"actions", c.actions},
            {"fixed_generations", c.fixed_generations},
            {"alpha", c.sarsa.alpha},
            {"gamma", c.sarsa.gamma},
            {"lambda", c.sarsa.lambda},
            {"epsilon", c.epsilon},
            {"min_split_samples", c.min_split_samples},
            {"significance", c.significance}};
}

ControlConfig control_from(const json& j) {
    ControlConfig c;
    c.enabled = j.at("enabled").get<bool>();
    c.actions = j.at("actions").get<std::vector<int>>();
    c.fixed_generations = j.at("fixed_generations").get<int>();
    c.sarsa.alpha = j.at("alpha").get<double>();
    c.sarsa.gamma = j.at("gamma").get<double>();
    c.sarsa.lambda = j.at("lambda").get<double>();
    c.epsilon = j.at("epsilon").get<double>();
    c.min_split_samples = j.at("min_split_samples").get<std::size_t>();
    c.significance = j.at("significance").get<double>();
    return c;
}

json config_json(const MetaConfig& c) {
    return {{"lambda", c.lambda},
            {"base", c.dims.base},
            {"hidden", c.dims.hidden},
            {"target", c.dims.target},
            {"sigmoid_scale", c.sigmoid_scale},
            {"init_population", c.init_population},
            {"batch_size", c.batch_size},
            {"eval_budget", c.eval_budget},
            {"bins_per_dim", c.bins_per_dim},
            {"database_capacity", c.database_capacity},
            {"mutation_rate", c.variation.rate},
            {"mutation_sigma", c.variation.sigma},
            {"objective", to_string(c.objective)},
            {"dropped_count", c.dropped_count},
            {"subset_fraction", c.subset_fraction},
            {"sigma0", c.sigma0},
            {"count_meta_evaluations", c.count_meta_evaluations},
            {"frozen_meta", c.frozen_meta},
            {"control", control_json(c.control)},
            {"workers", c.workers}};
}

MetaConfig config_from(const json& j) {
    MetaConfig c;
    c.lambda = j.at("lambda").get<std::size_t>();
    c.dims.base = j.at("base").get<std::size_t>();
    c.dims.hidden = j.at("hidden").get<std::size_t>();
    c.dims.target = j.at("target").get<std::size_t>();
    c.sigmoid_scale = j.at("sigmoid_scale").get<double>();
    c.init_population = j.at("init_population").get<std::size_t>();
    c.batch_size = j.at("batch_size").get<std::size_t>();
    c.eval_budget = j.at("eval_budget").get<std::uint64_t>();
    c.bins_per_dim = j.at("bins_per_dim").get<std::size_t>();
    c.database_capacity = j.at("database_capacity").get<std::size_t>();
    c.variation.rate = j.at("mutation_rate").get<double>();
    c.variation.sigma = j.at("mutation_sigma").get<double>();
    c.objective = meta_objective_from_string(j.at("objective").get<std::string>());
    c.dropped_count = j.at("dropped_count").get<std::size_t>();
    c.subset_fraction = j.at("subset_fraction").get<double>();
    c.sigma0 = j.at("sigma0").get<double>();
    c.count_meta_evaluations = j.at("count_meta_evaluations").get<bool>();
    c.frozen_meta = j.at("frozen_meta").get<bool>();
    c.control = control_from(j.at("control"));
    c.workers = j.at("workers").get<std::size_t>();
    return c;
}

json observation_json(const Observation& o) {
    return {o.max_meta_fitness, o.mean_meta_fitness, o.std_meta_fitness, o.genotypic_diversity, o.stagnation,
            o.last_reward};
}

Observation observation_from(const json& j) {
    Observation o;
    o.max_meta_fitness = j.at(0).get<double>();
    o.mean_meta_fitness = j.at(1).get<double>();
    o.std_meta_fitness = j.at(2).get<double>();
    o.genotypic_diversity = j.at(3).get<double>();
    o.stagnation = j.at(4).get<int>();
    o.last_reward = j.at(5).get<double>();
    return o;
}

std::size_t grid_cells(const MetaConfig& c) {
    std::size_t cells = 1;
    for (std::size_t d = 0; d < c.dims.target; ++d) cells *= c.bins_per_dim;
    return cells;
}

double mean_pairwise_distance(const std::vector<MetaIndividual>& pop) {
    if (pop.size() < 2) return 0.0;
    double total = 0.0;
    std::size_t pairs = 0;
    for (std::size_t i = 0; i < pop.size(); ++i) {
        for (std::size_t j = i + 1; j < pop.size(); ++j) {
            double sq = 0.0;
            const auto& a = pop[i].meta_genotype;
            const auto& b = pop[j].meta_genotype;
            for (std::size_t k = 0; k < a.size(); ++k) sq += (a[k] - b[k]) * (a[k] - b[k]);
            total += std::sqrt(sq);
            ++pairs;
        }
    }
    return total / static_cast<double>(pairs);
}

HistoryRow qd_row(std::size_t generation, std::uint64_t evaluations, std::size_t id, const GridArchive& archive) {
    const QdMetrics m = qd_metrics(archive.solutions());
    HistoryRow row;
    row.meta_generation = generation;
    row.evaluations = evaluations;
    row.individual_id = id;
    row.archive_count = m.count;
    row.mean_fitness = m.mean_fitness;
    row.max_fitness = m.max_fitness;
    return row;
}

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + p.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

std::string meta_config_to_json(const MetaConfig& config) { return config_json(config).dump(2); }

MetaConfig meta_config_from_json(const std::string& text) { return config_from(json::parse(text)); }

CircularDatabase init_database(std::size_t count, std::size_t n_genes, std::size_t capacity, Rng& rng,
                               EvaluationCounter& counter) {
    CircularDatabase db(capacity);
    for (std::size_t i = 0; i < count; ++i) db.insert(make_solution(Genotype::random(n_genes, rng), counter));
    return db;
}

GridArchive build_map_from_database(const FeatureMapNetwork& net, const CircularDatabase& db,
                                    std::size_t bins_per_dim) {
    GridArchive archive(net.dims.target, bins_per_dim);
    std::vector<double> beta(net.dims.target);
    db.for_each([&](const Solution& s) {
        map_features(net, s.base_features, beta);
        archive.try_insert(beta, s);
    });
    return archive;
}

std::uint64_t me_evaluations(std::uint64_t n, GridArchive& archive, const FeatureMapNetwork& net,
                             CircularDatabase& db, const MapElitesContext& ctx, Rng& rng) {
    if (n == 0) return 0;
    if (archive.empty()) throw std::logic_error("MAP-Elites iterations need a non-empty archive");
    if (ctx.counter == nullptr) throw std::invalid_argument("MAP-Elites iterations need an evaluation counter");
    std::vector<double> beta(net.dims.target);
    for (std::uint64_t k = 0; k < n; ++k) {
        const Solution& parent = archive.select_random(rng);
        Solution child =
            make_solution(mutate_gaussian(parent.genotype, ctx.variation.rate, ctx.variation.sigma, rng), *ctx.counter);
        map_features(net, child.base_features, beta);
        archive.try_insert(beta, child);
        db.insert(std::move(child));
    }
    return n;
}

std::uint64_t me_iterations(std::size_t n_generations, std::size_t batch_size, GridArchive& archive,
                            const FeatureMapNetwork& net, CircularDatabase& db, const MapElitesContext& ctx,
                            Rng& rng) {
    return me_evaluations(static_cast<std::uint64_t>(n_generations) * batch_size, archive, net, db, ctx, rng);
}

MetaGenotype initial_meta_mean(std::uint64_t seed, std::size_t genotype_size) {
    Rng rng = make_stream(seed, "cma-init");
    MetaGenotype m(genotype_size);
    for (double& v : m) v = uniform(rng, -1.0, 1.0);
    return m;
}

std::vector<std::size_t> draw_dropped_dimensions(std::uint64_t seed, std::size_t n_genes, std::size_t count) {
    Rng rng = make_stream(seed, "J");
    return sample_without_replacement(n_genes, count, rng);
}

// ---------------------------------------------------------------------------

MetaEvolution::MetaEvolution(MetaConfig config, std::uint64_t seed, Resume)
    : config_(std::move(config)),
      seed_(seed),
      db_(config_.database_capacity),
      controller_(config_.control) {}

MetaEvolution::MetaEvolution(MetaConfig config, std::uint64_t seed)
    : config_((config.validate(), std::move(config))),
      seed_(seed),
      db_(config_.database_capacity),
      controller_(config_.control) {
    const std::size_t n_init = static_cast<std::size_t>(
        std::min<std::uint64_t>(config_.init_population, config_.eval_budget));
    Rng init_rng = make_stream(seed_, "init");
    db_ = init_database(n_init, config_.n_genes(), config_.database_capacity, init_rng, counter_);
    cma_ = cma_init(config_.dims.genotype_size(), config_.lambda, config_.sigma0,
                    initial_meta_mean(seed_, config_.dims.genotype_size()));
    if (config_.objective == MetaObjective::Dimension) {
        dropped_ = draw_dropped_dimensions(seed_, config_.n_genes(), config_.dropped_count);
    }
    finished_ = remaining() == 0;
}

std::uint64_t MetaEvolution::remaining() const {
    const std::uint64_t used = counter_.count();
    return used >= config_.eval_budget ? 0 : config_.eval_budget - used;
}

std::uint64_t MetaEvolution::generation_cost_bound(int generations) const {
    const std::uint64_t me = static_cast<std::uint64_t>(generations) * config_.batch_size;
    std::uint64_t per_individual = me;
    if (config_.count_meta_evaluations) {
        const std::uint64_t size_bound = std::min<std::uint64_t>(grid_cells(config_), db_.size() + me);
        per_individual += meta_fitness_cost(config_.objective, static_cast<std::size_t>(size_bound),
                                            config_.subset_fraction, config_.dropped_count);
    }
    return per_individual * config_.lambda;
}

double MetaEvolution::score(const GridArchive& archive, std::size_t individual) {
    Rng rng = make_stream(seed_, "meta-fitness", generation_, individual);
    EvaluationCounter* counter = config_.count_meta_evaluations ? &counter_ : nullptr;
    if (config_.objective == MetaObjective::Dimension) {
        return meta_fitness_dimension(archive.solutions(), dropped_, config_.subset_fraction, rng, counter);
    }
    return meta_fitness_translation(archive.solutions(), config_.subset_fraction, rng, counter);
}

void MetaEvolution::step() {
    if (finished_) return;

    Rng control_rng = make_stream(seed_, "control", generation_);
    const int generations = controller_.choose(observation_, control_rng);
    const std::size_t state = controller_.last_state();

    if (generation_cost_bound(generations) > remaining()) {
        run_tail();
        return;
    }

    const std::uint64_t evals_before = counter_.count();
    std::vector<MetaGenotype> samples;
    if (config_.frozen_meta) {
        const MetaGenotype mean(cma_.mean.data(), cma_.mean.data() + cma_.mean.size());
        samples.assign(config_.lambda, mean);
    } else {
        Rng sample_rng = make_stream(seed_, "cma-sample", generation_);
        samples = cma_sample(cma_, sample_rng);
    }

    const std::size_t lambda = config_.lambda;
    std::vector<MetaIndividual> population(lambda);
    std::vector<CircularDatabase> staging;
    staging.reserve(lambda);
    const std::size_t staging_capacity = static_cast<std::size_t>(generations) * config_.batch_size;
    for (std::size_t i = 0; i < lambda; ++i) staging.emplace_back(staging_capacity);

    const MapElitesContext ctx{config_.variation, &counter_};
    parallel_for(lambda, config_.workers, [&](std::size_t i) {
        MetaIndividual& ind = population[i];
        ind.id = i;
        ind.meta_genotype = samples[i];
        const FeatureMapNetwork net = transform(ind.meta_genotype, config_.dims, config_.sigmoid_scale);
        ind.archive = build_map_from_database(net, db_, config_.bins_per_dim);
        Rng me_rng = make_stream(seed_, "me", generation_, i);
        me_iterations(static_cast<std::size_t>(generations), config_.batch_size, ind.archive, net, staging[i], ctx,
                      me_rng);
        ind.meta_fitness = score(ind.archive, i);
    });

    for (const CircularDatabase& s : staging) s.for_each([&](const Solution& sol) { db_.insert(sol); });

    std::vector<double> fitness(lambda);
    for (std::size_t i = 0; i < lambda; ++i) fitness[i] = population[i].meta_fitness;
    if (!config_.frozen_meta) cma_update(cma_, samples, fitness);

    const double gen_max = *std::max_element(fitness.begin(), fitness.end());
    double gen_mean = 0.0;
    for (double f : fitness) gen_mean += f;
    gen_mean /= static_cast<double>(lambda);
    double var = 0.0;
    for (double f : fitness) var += (f - gen_mean) * (f - gen_mean);
    const double gen_std = std::sqrt(var / static_cast<double>(lambda));

    // Relative gain of the best-so-far maximum per evaluation spent; zero on
    // the first meta-generation, which has no reference point.
    const std::uint64_t spent = counter_.count() - evals_before;
    const double reward =
        best_trace_.empty() ? 0.0 : compute_reward(best_ever_, gen_max, static_cast<long long>(spent));
    controller_.finish(reward);

    if (best_trace_.empty() || gen_max > best_ever_) {
        best_ever_ = gen_max;
        observation_.stagnation = 0;
    } else {
        ++observation_.stagnation;
    }
    best_trace_.push_back(best_ever_);
    observation_.max_meta_fitness = gen_max;
    observation_.mean_meta_fitness = gen_mean;
    observation_.std_meta_fitness = gen_std;
    observation_.genotypic_diversity = mean_pairwise_distance(population);
    observation_.last_reward = reward;

    const std::uint64_t evals_now = counter_.count();
    for (const MetaIndividual& ind : population) {
        HistoryRow row = qd_row(generation_, evals_now, ind.id, ind.archive);
        row.meta_fitness = ind.meta_fitness;
        row.generations_action = generations;
        row.reward = reward;
        history_.push_back(row);
    }
    control_trace_.push_back({generation_, state, generations, reward, gen_max, controller_.tree().leaf_count()});

    population_ = std::move(population);
    ++generation_;
    if (remaining() == 0) finished_ = true;
}

void MetaEvolution::run_tail() {
    const std::uint64_t left = remaining();
    std::size_t id = 0;
    GridArchive* archive = nullptr;
    if (population_.empty()) {
        MetaIndividual ind;
        ind.id = 0;
        ind.meta_genotype.assign(cma_.mean.data(), cma_.mean.data() + cma_.mean.size());
        ind.archive = build_map_from_database(transform(ind.meta_genotype, config_.dims, config_.sigmoid_scale), db_,
                                              config_.bins_per_dim);
        population_.push_back(std::move(ind));
        archive = &population_.back().archive;
    } else {
        const MetaIndividual& best = select_best_meta_individual(population_);
        id = best.id;
        archive = &population_[id].archive;
    }
    if (left > 0) {
        const FeatureMapNetwork net = transform(population_[id].meta_genotype, config_.dims, config_.sigmoid_scale);
        Rng me_rng = make_stream(seed_, "me", generation_, id);
        const MapElitesContext ctx{config_.variation, &counter_};
        me_evaluations(left, *archive, net, db_, ctx, me_rng);
        history_.push_back(qd_row(generation_, counter_.count(), id, *archive));
    }
    tail_done_ = true;
    finished_ = true;
}

MetaRunResult MetaEvolution::run() {
    while (!finished_) step();
    return result();
}

MetaRunResult MetaEvolution::result() const {
    MetaRunResult r;
    r.population = population_;
    if (!population_.empty()) r.best = select_best_meta_individual(population_);
    r.history = history_;
    r.control_trace = control_trace_;
    r.best_meta_fitness_trace = best_trace_;
    r.evaluations = counter_.count();
    r.meta_generations = generation_;
    return r;
}

void MetaEvolution::save_checkpoint(const fs::path& dir) const {
    const fs::path tmp = dir.string() + ".tmp";
    fs::remove_all(tmp);
    fs::create_directories(tmp);

    json state;
    state["format"] = "qdmeta-checkpoint-1";
    state["config"] = config_json(config_);
    state["seed"] = seed_;
    state["evaluations"] = counter_.count();
    state["generation"] = generation_;
    state["finished"] = finished_;
    state["tail_done"] = tail_done_;
    state["dropped"] = dropped_;
    state["cma"] = json::parse(cma_to_json(cma_));
    state["controller"] = json::parse(controller_.to_json());
    state["observation"] = observation_json(observation_);
    state["best_ever"] = best_ever_;
    state["best_trace"] = best_trace_;
    json pop = json::array();
    for (const auto& ind : population_) {
        pop.push_back({{"id", ind.id}, {"meta_genotype", ind.meta_genotype}, {"meta_fitness", ind.meta_fitness}});
    }
    state["population"] = pop;
    write_text_file((tmp / "state.json").string(), state.dump(1));

    {
        std::ostringstream os;
        write_database(os, db_);
        write_text_file((tmp / "database.csv").string(), os.str());
    }
    for (std::size_t i = 0; i < population_.size(); ++i) {
        save_archive((tmp / ("archive_" + std::to_string(i) + ".csv")).string(),
                     to_archive_file(population_[i].archive));
    }
    save_history((tmp / "history.csv").string(), history_);
    {
        std::ostringstream os;
        write_control_trace(os, control_trace_);
        write_text_file((tmp / "control.csv").string(), os.str());
    }

    fs::remove_all(dir);
    fs::rename(tmp, dir);
}

MetaEvolution MetaEvolution::resume(const fs::path& dir) {
    const json state = json::parse(read_file(dir / "state.json"));
    if (state.value("format", "") != "qdmeta-checkpoint-1") {
        throw std::runtime_error(dir.string() + " is not a qdmeta checkpoint");
    }
    MetaConfig config = config_from(state.at("config"));
    config.validate();
    MetaEvolution me(config, state.at("seed").get<std::uint64_t>(), Resume{});
    me.counter_.reset(state.at("evaluations").get<std::uint64_t>());
    me.generation_ = state.at("generation").get<std::size_t>();
    me.finished_ = state.at("finished").get<bool>();
    me.tail_done_ = state.at("tail_done").get<bool>();
    me.dropped_ = state.at("dropped").get<std::vector<std::size_t>>();
    me.cma_ = cma_from_json(state.at("cma").dump());
    me.controller_ = GenerationController::from_json(state.at("controller").dump(), config.control);
    me.observation_ = observation_from(state.at("observation"));
    me.best_ever_ = state.at("best_ever").get<double>();
    me.best_trace_ = state.at("best_trace").get<std::vector<double>>();
    {
        std::ifstream in(dir / "database.csv", std::ios::binary);
        if (!in) throw std::runtime_error("checkpoint is missing database.csv");
        me.db_ = read_database(in);
    }
    const auto& pop = state.at("population");
    for (std::size_t i = 0; i < pop.size(); ++i) {
        MetaIndividual ind;
        ind.id = pop[i].at("id").get<std::size_t>();
        ind.meta_genotype = pop[i].at("meta_genotype").get<MetaGenotype>();
        ind.meta_fitness = pop[i].at("meta_fitness").get<double>();
        ind.archive = grid_from_archive_file(load_archive((dir / ("archive_" + std::to_string(i) + ".csv")).string()));
        me.population_.push_back(std::move(ind));
    }
    me.history_ = load_history((dir / "history.csv").string());
    {
        std::ifstream in(dir / "control.csv", std::ios::binary);
        if (!in) throw std::runtime_error("checkpoint is missing control.csv");
        me.control_trace_ = read_control_trace(in);
    }
    return me;
}

MetaRunResult run_meta_evolution(const MetaConfig& config, std::uint64_t seed) {
    MetaEvolution me(config, seed);
    return me.run();
}

}  // namespace qdmeta
