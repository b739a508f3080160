#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "qdmeta/baselines.hpp"
#include "qdmeta/config.hpp"
#include "qdmeta/domain.hpp"
#include "qdmeta/evaluation.hpp"
#include "qdmeta/feature_map.hpp"
#include "qdmeta/meta_evolution.hpp"

namespace py = pybind11;
using namespace qdmeta;

namespace {

py::dict history_row(const HistoryRow& r) {
    py::dict d;
    d["meta_generation"] = r.meta_generation;
    d["evaluations"] = r.evaluations;
    d["individual_id"] = r.individual_id;
    d["archive_count"] = r.archive_count;
    d["mean_fitness"] = r.mean_fitness;
    d["max_fitness"] = r.max_fitness;
    d["meta_fitness"] = r.meta_fitness;
    d["generations_action"] = r.generations_action;
    d["reward"] = r.reward;
    return d;
}

py::list history(const std::vector<HistoryRow>& rows) {
    py::list out;
    for (const auto& r : rows) out.append(history_row(r));
    return out;
}

py::list solutions(std::span<const Solution> sols) {
    py::list out;
    for (const auto& s : sols) out.append(py::make_tuple(s.genotype.genes, s.fitness));
    return out;
}

Landscape landscape_from(const std::string& kind, const std::vector<double>& params) {
    auto need = [&](std::size_t n) {
        if (params.size() != n) throw std::invalid_argument(kind + " takes " + std::to_string(n) + " parameters");
    };
    if (kind == "base") return BaseLandscape{};
    if (kind == "drop") {
        need(1);
        return DimensionDrop{static_cast<std::size_t>(params[0])};
    }
    if (kind == "noise") {
        need(2);
        return DimensionNoise{static_cast<std::size_t>(params[0]), static_cast<std::size_t>(params[1])};
    }
    if (kind == "translation") {
        need(2);
        return Translation{params[0], params[1]};
    }
    throw std::invalid_argument("unknown landscape kind '" + kind + "'");
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Quality-diversity meta-evolution core";

    m.def("rastrigin", [](const std::vector<double>& x) { return rastrigin(x); }, py::arg("x"),
          "Negated Rastrigin; 0 at the origin.");
    m.def(
        "evaluate_landscape",
        [](const std::string& kind, const std::vector<double>& params, const std::vector<double>& x) {
            const Landscape l = landscape_from(kind, params);
            validate(l, x.size());
            return evaluate(l, x);
        },
        py::arg("kind"), py::arg("params"), py::arg("x"),
        "kind is 'base', 'drop' [j], 'noise' [i, j] or 'translation' [a, b].");
    m.def("decode", [](const std::vector<double>& g) { return decode(Genotype(g)).coords; }, py::arg("genes"));
    m.def(
        "map_features",
        [](const std::vector<double>& w, const std::vector<double>& base, std::size_t hidden, std::size_t target) {
            NetworkDims dims{base.size(), hidden, target};
            return map_features(transform(w, dims), base);
        },
        py::arg("w"), py::arg("base"), py::arg("hidden") = 10, py::arg("target") = 2);
    m.def("genotype_size",
          [](std::size_t base, std::size_t hidden, std::size_t target) {
              return NetworkDims{base, hidden, target}.genotype_size();
          },
          py::arg("base") = 20, py::arg("hidden") = 10, py::arg("target") = 2);

    m.def(
        "run_meta_evolution",
        [](const std::string& config_text, std::uint64_t seed) {
            const RunConfig cfg = parse_run_config_text(config_text);
            MetaRunResult r;
            {
                py::gil_scoped_release release;
                r = run_meta_evolution(cfg.meta_config(), seed);
            }
            py::dict d;
            d["history"] = history(r.history);
            d["evaluations"] = r.evaluations;
            d["meta_generations"] = r.meta_generations;
            d["best_meta_fitness"] = r.best.meta_fitness;
            d["best_meta_fitness_trace"] = r.best_meta_fitness_trace;
            d["archive"] = solutions(r.best.archive.solutions());
            return d;
        },
        py::arg("config_text"), py::arg("seed"),
        "Runs QD-Meta from config text (same format as the CLI) and returns history and best archive.");
    m.def(
        "run_baseline",
        [](const std::string& config_text, std::uint64_t seed) {
            const RunConfig cfg = parse_run_config_text(config_text);
            std::vector<HistoryRow> rows;
            std::vector<Solution> sols;
            std::uint64_t evals = 0;
            {
                py::gil_scoped_release release;
                const BaselineConfig b = cfg.baseline_config();
                if (cfg.algorithm == Algorithm::Cvt) {
                    auto r = run_cvt(b, seed);
                    rows = r.history;
                    sols.assign(r.archive.solutions().begin(), r.archive.solutions().end());
                    evals = r.evaluations;
                } else if (cfg.algorithm == Algorithm::FixedMapElites) {
                    auto r = run_fixed_map_elites(b, initial_meta_mean(seed, b.dims.genotype_size()), seed);
                    rows = r.history;
                    sols.assign(r.archive.solutions().begin(), r.archive.solutions().end());
                    evals = r.evaluations;
                } else {
                    throw std::invalid_argument("run_baseline needs algorithm = cvt or fixed-me");
                }
            }
            py::dict d;
            d["history"] = history(rows);
            d["evaluations"] = evals;
            d["archive"] = solutions(sols);
            return d;
        },
        py::arg("config_text"), py::arg("seed"));
    m.def(
        "adaptation_test",
        [](const std::vector<std::vector<double>>& genotypes, const std::string& kind,
           const std::vector<double>& params, std::size_t budget, std::uint64_t seed) {
            std::vector<Solution> archive;
            EvaluationCounter counter;
            for (const auto& g : genotypes) archive.push_back(make_solution(Genotype(g), counter));
            Rng rng(seed);
            const Landscape l = landscape_from(kind, params);
            return adaptation_test(archive, l, budget, rng).best_so_far;
        },
        py::arg("genotypes"), py::arg("kind"), py::arg("params"), py::arg("budget") = 100, py::arg("seed") = 1);

    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
}
