#include "qdmeta/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "qdmeta/archive.hpp"

namespace qdmeta {

std::string to_string(Algorithm algorithm) {
    switch (algorithm) {
        case Algorithm::QdMetaDimension: return "qd-meta-dimension";
        case Algorithm::QdMetaTranslation: return "qd-meta-translation";
        case Algorithm::Cvt: return "cvt";
        case Algorithm::FixedMapElites: return "fixed-me";
    }
    return "unknown";
}

Algorithm algorithm_from_string(const std::string& name) {
    for (Algorithm a : {Algorithm::QdMetaDimension, Algorithm::QdMetaTranslation, Algorithm::Cvt,
                        Algorithm::FixedMapElites}) {
        if (to_string(a) == name) return a;
    }
    throw std::invalid_argument("unknown algorithm '" + name +
                                "' (expected qd-meta-dimension, qd-meta-translation, cvt or fixed-me)");
}

MetaConfig RunConfig::meta_config() const {
    MetaConfig m = meta;
    m.objective = algorithm == Algorithm::QdMetaDimension ? MetaObjective::Dimension : MetaObjective::Translation;
    m.workers = workers;
    return m;
}

BaselineConfig RunConfig::baseline_config() const {
    BaselineConfig b = baseline_from_meta(meta, algorithm == Algorithm::Cvt ? BaselineAlgorithm::CvtMapElites
                                                                            : BaselineAlgorithm::FixedMapElites);
    b.centroid_count = baseline.centroid_count;
    b.kmeans_samples = baseline.kmeans_samples;
    b.centroid_seed = baseline.centroid_seed;
    return b;
}

ConfigError::ConfigError(std::size_t line, const std::string& message)
    : std::runtime_error("line " + std::to_string(line) + ": " + message), line_(line) {}

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

template <typename T>
T parse_unsigned(const std::string& v) {
    T out{};
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || ptr != v.data() + v.size() || v.empty()) {
        throw std::invalid_argument("expected a non-negative integer, got '" + v + "'");
    }
    return out;
}

std::size_t parse_size(const std::string& v) { return parse_unsigned<std::size_t>(v); }
std::uint64_t parse_u64(const std::string& v) { return parse_unsigned<std::uint64_t>(v); }

double parse_real(const std::string& v) {
    try {
        return parse_double(v);
    } catch (const std::invalid_argument&) {
        throw std::invalid_argument("expected a number, got '" + v + "'");
    }
}

bool parse_bool(const std::string& v) {
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw std::invalid_argument("expected a boolean, got '" + v + "'");
}

std::vector<int> parse_int_list(const std::string& v) {
    std::vector<int> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(static_cast<int>(parse_size(trim(item))));
    if (out.empty()) throw std::invalid_argument("expected a comma-separated list of integers");
    return out;
}

using Setter = std::function<void(RunConfig&, const std::string&)>;

const std::map<std::string, std::map<std::string, Setter>>& setters() {
    static const std::map<std::string, std::map<std::string, Setter>> table = {
        {"run",
         {
             {"algorithm", [](RunConfig& c, const std::string& v) { c.algorithm = algorithm_from_string(v); }},
             {"seed", [](RunConfig& c, const std::string& v) { c.master_seed = parse_u64(v); }},
             {"output", [](RunConfig& c, const std::string& v) { c.output_directory = v; }},
             {"checkpoint_interval", [](RunConfig& c, const std::string& v) { c.checkpoint_interval = parse_size(v); }},
             {"replicates", [](RunConfig& c, const std::string& v) { c.replicate_count = parse_size(v); }},
             {"workers", [](RunConfig& c, const std::string& v) { c.workers = parse_size(v); }},
         }},
        {"evolution",
         {
             {"genes", [](RunConfig& c, const std::string& v) { c.meta.dims.base = parse_size(v); }},
             {"init_population", [](RunConfig& c, const std::string& v) { c.meta.init_population = parse_size(v); }},
             {"batch_size", [](RunConfig& c, const std::string& v) { c.meta.batch_size = parse_size(v); }},
             {"eval_budget", [](RunConfig& c, const std::string& v) { c.meta.eval_budget = parse_u64(v); }},
             {"bins_per_dim", [](RunConfig& c, const std::string& v) { c.meta.bins_per_dim = parse_size(v); }},
             {"database_capacity",
              [](RunConfig& c, const std::string& v) { c.meta.database_capacity = parse_size(v); }},
             {"mutation_rate", [](RunConfig& c, const std::string& v) { c.meta.variation.rate = parse_real(v); }},
             {"mutation_sigma", [](RunConfig& c, const std::string& v) { c.meta.variation.sigma = parse_real(v); }},
         }},
        {"meta",
         {
             {"lambda", [](RunConfig& c, const std::string& v) { c.meta.lambda = parse_size(v); }},
             {"hidden", [](RunConfig& c, const std::string& v) { c.meta.dims.hidden = parse_size(v); }},
             {"target", [](RunConfig& c, const std::string& v) { c.meta.dims.target = parse_size(v); }},
             {"sigmoid_scale", [](RunConfig& c, const std::string& v) { c.meta.sigmoid_scale = parse_real(v); }},
             {"dropped_count", [](RunConfig& c, const std::string& v) { c.meta.dropped_count = parse_size(v); }},
             {"subset_fraction", [](RunConfig& c, const std::string& v) { c.meta.subset_fraction = parse_real(v); }},
             {"sigma0", [](RunConfig& c, const std::string& v) { c.meta.sigma0 = parse_real(v); }},
             {"count_meta_evaluations",
              [](RunConfig& c, const std::string& v) { c.meta.count_meta_evaluations = parse_bool(v); }},
             {"frozen", [](RunConfig& c, const std::string& v) { c.meta.frozen_meta = parse_bool(v); }},
             {"rl_enabled", [](RunConfig& c, const std::string& v) { c.meta.control.enabled = parse_bool(v); }},
             {"fixed_generations",
              [](RunConfig& c, const std::string& v) {
                  c.meta.control.fixed_generations = static_cast<int>(parse_size(v));
              }},
             {"actions", [](RunConfig& c, const std::string& v) { c.meta.control.actions = parse_int_list(v); }},
             {"epsilon", [](RunConfig& c, const std::string& v) { c.meta.control.epsilon = parse_real(v); }},
             {"alpha", [](RunConfig& c, const std::string& v) { c.meta.control.sarsa.alpha = parse_real(v); }},
             {"gamma", [](RunConfig& c, const std::string& v) { c.meta.control.sarsa.gamma = parse_real(v); }},
             {"trace_decay", [](RunConfig& c, const std::string& v) { c.meta.control.sarsa.lambda = parse_real(v); }},
             {"min_split_samples",
              [](RunConfig& c, const std::string& v) { c.meta.control.min_split_samples = parse_size(v); }},
             {"significance",
              [](RunConfig& c, const std::string& v) { c.meta.control.significance = parse_real(v); }},
         }},
        {"cvt",
         {
             {"centroids", [](RunConfig& c, const std::string& v) { c.baseline.centroid_count = parse_size(v); }},
             {"kmeans_samples",
              [](RunConfig& c, const std::string& v) { c.baseline.kmeans_samples = parse_size(v); }},
             {"centroid_seed", [](RunConfig& c, const std::string& v) { c.baseline.centroid_seed = parse_u64(v); }},
         }},
    };
    return table;
}

}  // namespace

RunConfig parse_run_config(std::istream& is) {
    RunConfig cfg;
    std::string section;
    std::set<std::string> seen;
    std::string raw;
    std::size_t line_no = 0;
    while (std::getline(is, raw)) {
        ++line_no;
        std::string line = raw;
        if (const auto c = line.find_first_of("#;"); c != std::string::npos) line.erase(c);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') throw ConfigError(line_no, "unterminated section header '" + line + "'");
            section = trim(line.substr(1, line.size() - 2));
            if (!setters().count(section)) throw ConfigError(line_no, "unknown section [" + section + "]");
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError(line_no, "expected key = value, got '" + line + "'");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty()) throw ConfigError(line_no, "missing key before '='");
        if (section.empty()) throw ConfigError(line_no, "key '" + key + "' appears before any [section]");
        const auto& keys = setters().at(section);
        const auto it = keys.find(key);
        if (it == keys.end()) throw ConfigError(line_no, "unknown key '" + key + "' in section [" + section + "]");
        if (!seen.insert(section + "." + key).second) {
            throw ConfigError(line_no, "duplicate key '" + key + "' in section [" + section + "]");
        }
        try {
            it->second(cfg, value);
        } catch (const std::invalid_argument& e) {
            throw ConfigError(line_no, key + ": " + e.what());
        }
    }
    cfg.baseline.dims = cfg.meta.dims;
    if (cfg.replicate_count == 0) throw ConfigError(line_no, "replicates must be at least 1");
    if (cfg.workers == 0) throw ConfigError(line_no, "workers must be at least 1");
    return cfg;
}

RunConfig parse_run_config_text(const std::string& text) {
    std::istringstream is(text);
    return parse_run_config(is);
}

RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file " + path);
    try {
        return parse_run_config(in);
    } catch (const ConfigError& e) {
        throw ConfigError(e.line(), std::string(e.what()).substr(std::string(e.what()).find(": ") + 2) +
                                        " (in " + path + ")");
    }
}

}  // namespace qdmeta
