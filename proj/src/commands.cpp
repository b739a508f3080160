#include "qdmeta/commands.hpp"

#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <ostream>
#include <sstream>

#include "qdmeta/baselines.hpp"
#include "qdmeta/config.hpp"
#include "qdmeta/evaluation.hpp"
#include "qdmeta/meta_evolution.hpp"
#include "qdmeta/records.hpp"

namespace qdmeta {

namespace fs = std::filesystem;

namespace {

std::atomic<bool> g_interrupt{false};

std::string to_text(const auto& writer) {
    std::ostringstream os;
    writer(os);
    return os.str();
}

void write_outputs(const fs::path& dir, const MetaEvolution& me) {
    fs::create_directories(dir);
    const MetaRunResult r = me.result();
    save_history((dir / "metrics.csv").string(), r.history);
    write_text_file((dir / "control.csv").string(),
                    to_text([&](std::ostream& os) { write_control_trace(os, r.control_trace); }));
    save_archive((dir / "archive.csv").string(), to_archive_file(r.best.archive));
    write_text_file((dir / "config.json").string(), meta_config_to_json(me.config()) + "\n");
}

// Returns false when interrupted (after writing a checkpoint).
bool drive(MetaEvolution& me, const fs::path& dir, std::size_t checkpoint_interval, std::ostream& log) {
    const fs::path ckpt = dir / "checkpoint";
    while (!me.finished()) {
        if (interrupt_requested()) {
            me.save_checkpoint(ckpt);
            log << "interrupted: checkpoint written to " << ckpt.string() << '\n';
            return false;
        }
        me.step();
        if (checkpoint_interval > 0 && !me.finished() && me.meta_generation() % checkpoint_interval == 0) {
            me.save_checkpoint(ckpt);
        }
    }
    fs::remove_all(ckpt);
    return true;
}

void log_final(std::ostream& log, const fs::path& dir, const std::vector<HistoryRow>& history,
               std::uint64_t evaluations) {
    log << dir.string() << ": " << evaluations << " evaluations";
    if (!history.empty()) {
        const HistoryRow& last = history.back();
        log << ", archive " << last.archive_count;
        if (last.mean_fitness) log << ", mean " << *last.mean_fitness;
        if (last.max_fitness) log << ", max " << *last.max_fitness;
    }
    log << '\n';
}

}  // namespace

void request_interrupt() { g_interrupt.store(true); }
bool interrupt_requested() { return g_interrupt.load(); }
void clear_interrupt() { g_interrupt.store(false); }

int cmd_evolve(const EvolveOptions& options, std::ostream& log) {
    if (options.resume) {
        const fs::path ckpt(*options.resume);
        MetaEvolution me = MetaEvolution::resume(ckpt);
        if (options.workers) me.set_workers(*options.workers);
        const fs::path dir = options.out ? fs::path(*options.out) : ckpt.parent_path();
        log << "resuming at meta-generation " << me.meta_generation() << " (" << me.evaluations()
            << " evaluations)\n";
        if (!drive(me, dir, 10, log)) return kInterruptedExit;
        write_outputs(dir, me);
        log_final(log, dir, me.history(), me.evaluations());
        return 0;
    }

    RunConfig cfg = load_run_config(options.config_path);
    if (options.seed) cfg.master_seed = *options.seed;
    if (options.workers) cfg.workers = std::max<std::size_t>(*options.workers, 1);
    if (options.out) cfg.output_directory = *options.out;
    if (options.budget) cfg.meta.eval_budget = *options.budget;

    const fs::path root(cfg.output_directory);
    fs::create_directories(root);

    std::optional<std::vector<std::vector<double>>> centroids;
    for (std::size_t rep = 0; rep < cfg.replicate_count; ++rep) {
        const std::uint64_t seed = cfg.master_seed + rep;
        const fs::path dir = cfg.replicate_count > 1 ? root / ("rep_" + std::to_string(rep)) : root;
        fs::create_directories(dir);
        switch (cfg.algorithm) {
            case Algorithm::QdMetaDimension:
            case Algorithm::QdMetaTranslation: {
                MetaEvolution me(cfg.meta_config(), seed);
                if (!drive(me, dir, cfg.checkpoint_interval, log)) return kInterruptedExit;
                write_outputs(dir, me);
                log_final(log, dir, me.history(), me.evaluations());
                break;
            }
            case Algorithm::Cvt: {
                const BaselineConfig b = cfg.baseline_config();
                if (!centroids) centroids = baseline_centroids(b);
                const CvtRunResult r = run_cvt(b, seed, &*centroids);
                save_history((dir / "metrics.csv").string(), r.history);
                save_archive((dir / "archive.csv").string(), to_archive_file(r.archive));
                log_final(log, dir, r.history, r.evaluations);
                break;
            }
            case Algorithm::FixedMapElites: {
                const BaselineConfig b = cfg.baseline_config();
                const MetaGenotype w = initial_meta_mean(seed, b.dims.genotype_size());
                const FixedRunResult r = run_fixed_map_elites(b, w, seed);
                save_history((dir / "metrics.csv").string(), r.history);
                save_archive((dir / "archive.csv").string(), to_archive_file(r.archive));
                log_final(log, dir, r.history, r.evaluations);
                break;
            }
        }
        if (interrupt_requested()) {
            log << "interrupted after replicate " << rep << '\n';
            return kInterruptedExit;
        }
    }
    return 0;
}

int cmd_test(const TestOptions& options, std::ostream& log) {
    const ArchiveFile file = load_archive(options.archive_path);
    if (file.solutions.empty()) throw std::runtime_error(options.archive_path + ": archive is empty");
    std::vector<Landscape> suite;
    if (options.suite == "dimension") {
        Rng suite_rng = make_stream(options.seed, "dimension-suite");
        suite = dimension_test_landscapes(suite_rng, file.n_genes);
    } else if (options.suite == "translation") {
        suite = translation_test_landscapes();
    } else {
        throw std::invalid_argument("unknown suite '" + options.suite + "' (expected dimension or translation)");
    }
    Rng rng = make_stream(options.seed, "test");
    const SuiteResult result = run_test_suite(file.solutions, suite, options.budget, rng, options.workers);

    const fs::path dir(options.out);
    fs::create_directories(dir);
    write_text_file((dir / ("curves_" + options.suite + ".csv")).string(),
                    to_text([&](std::ostream& os) { write_curves(os, result.curves); }));
    write_text_file((dir / ("summary_" + options.suite + ".csv")).string(),
                    to_text([&](std::ostream& os) { write_curve_summary(os, result.summary); }));
    log << options.suite << " suite: " << result.curves.size() << " scenarios, best-so-far at " << options.budget
        << " = " << result.summary.mean.back() << " +- " << result.summary.standard_error.back() << '\n';
    return 0;
}

// --- metrics ----------------------------------------------------------------

namespace {

struct MeanSe {
    double mean = 0.0;
    double se = 0.0;
    std::size_t n = 0;
};

MeanSe mean_se(const std::vector<double>& v) {
    MeanSe r;
    r.n = v.size();
    if (v.empty()) return r;
    for (double x : v) r.mean += x;
    r.mean /= static_cast<double>(v.size());
    if (v.size() > 1) {
        double ss = 0.0;
        for (double x : v) ss += (x - r.mean) * (x - r.mean);
        r.se = std::sqrt(ss / static_cast<double>(v.size() - 1)) / std::sqrt(static_cast<double>(v.size()));
    }
    return r;
}

// One representative row per meta-generation: the individual with the highest
// meta-fitness, or the single row when no meta-fitness was recorded.
std::vector<HistoryRow> representative_rows(const std::vector<HistoryRow>& rows) {
    std::vector<HistoryRow> out;
    for (const HistoryRow& r : rows) {
        if (out.empty() || out.back().meta_generation != r.meta_generation) {
            out.push_back(r);
            continue;
        }
        HistoryRow& cur = out.back();
        if (r.meta_fitness && (!cur.meta_fitness || *r.meta_fitness > *cur.meta_fitness)) cur = r;
    }
    return out;
}

std::optional<double> final_meta_fitness(const std::vector<HistoryRow>& rows) {
    std::optional<std::size_t> last_gen;
    for (const auto& r : rows) {
        if (r.meta_fitness) last_gen = r.meta_generation;
    }
    if (!last_gen) return std::nullopt;
    std::optional<double> best;
    for (const auto& r : rows) {
        if (r.meta_generation == *last_gen && r.meta_fitness && (!best || *r.meta_fitness > *best)) {
            best = r.meta_fitness;
        }
    }
    return best;
}

std::string fmt(const MeanSe& m) {
    if (m.n == 0) return "-";
    std::ostringstream os;
    os << std::setprecision(6) << m.mean << " +- " << m.se;
    return os.str();
}

void put_mean_se(std::ostream& os, const MeanSe& m) {
    if (m.n == 0) {
        os << ",,";
    } else {
        os << ',' << format_double(m.mean) << ',' << format_double(m.se);
    }
}

std::string condition_of(const fs::path& metrics_file, const fs::path& root) {
    fs::path dir = metrics_file.parent_path();
    if (dir.filename().string().rfind("rep_", 0) == 0) dir = dir.parent_path();
    const fs::path rel = fs::relative(dir, root);
    return rel.empty() ? std::string(".") : rel.generic_string();
}

}  // namespace

int cmd_metrics(const std::string& run_directory, std::ostream& out) {
    const fs::path root(run_directory);
    if (!fs::is_directory(root)) throw std::runtime_error(run_directory + " is not a directory");
    std::vector<fs::path> files;
    for (const auto& entry : fs::recursive_directory_iterator(root)) {
        if (entry.is_regular_file() && entry.path().filename() == "metrics.csv") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    std::map<std::string, std::vector<std::vector<HistoryRow>>> runs;
    for (const auto& f : files) {
        auto rows = load_history(f.string());
        if (!rows.empty()) runs[condition_of(f, root)].push_back(std::move(rows));
    }
    if (runs.empty()) throw std::runtime_error("no non-empty metrics.csv files under " + run_directory);

    std::ostringstream summary;
    summary << "condition,runs,count_mean,count_se,mean_fitness_mean,mean_fitness_se,max_fitness_mean,"
               "max_fitness_se,meta_fitness_mean,meta_fitness_se\n";
    std::ostringstream aggregate;
    aggregate << "condition,step,n,evaluations_mean,count_mean,count_se,mean_fitness_mean,mean_fitness_se,"
                 "max_fitness_mean,max_fitness_se,meta_fitness_mean,meta_fitness_se\n";

    out << std::left << std::setw(28) << "condition" << std::setw(6) << "runs" << std::setw(24) << "count"
        << std::setw(26) << "mean_fitness" << std::setw(26) << "max_fitness" << "meta_fitness\n";
    for (const auto& [condition, replicate_rows] : runs) {
        std::vector<double> count, mean, max, meta;
        for (const auto& rows : replicate_rows) {
            const HistoryRow& last = rows.back();
            count.push_back(static_cast<double>(last.archive_count));
            if (last.mean_fitness) mean.push_back(*last.mean_fitness);
            if (last.max_fitness) max.push_back(*last.max_fitness);
            if (auto m = final_meta_fitness(rows)) meta.push_back(*m);
        }
        const MeanSe c = mean_se(count), mf = mean_se(mean), xf = mean_se(max), me = mean_se(meta);
        out << std::left << std::setw(28) << condition << std::setw(6) << replicate_rows.size() << std::setw(24)
            << fmt(c) << std::setw(26) << fmt(mf) << std::setw(26) << fmt(xf) << fmt(me) << '\n';
        summary << condition << ',' << replicate_rows.size();
        for (const MeanSe* m : {&c, &mf, &xf, &me}) put_mean_se(summary, *m);
        summary << '\n';

        std::vector<std::vector<HistoryRow>> series;
        std::size_t longest = 0;
        for (const auto& rows : replicate_rows) {
            series.push_back(representative_rows(rows));
            longest = std::max(longest, series.back().size());
        }
        for (std::size_t step = 0; step < longest; ++step) {
            std::vector<double> ev, co, mn, mx, mt;
            for (const auto& s : series) {
                if (step >= s.size()) continue;
                const HistoryRow& r = s[step];
                ev.push_back(static_cast<double>(r.evaluations));
                co.push_back(static_cast<double>(r.archive_count));
                if (r.mean_fitness) mn.push_back(*r.mean_fitness);
                if (r.max_fitness) mx.push_back(*r.max_fitness);
                if (r.meta_fitness) mt.push_back(*r.meta_fitness);
            }
            aggregate << condition << ',' << step << ',' << ev.size() << ',' << format_double(mean_se(ev).mean);
            for (const auto* v : {&co, &mn, &mx, &mt}) put_mean_se(aggregate, mean_se(*v));
            aggregate << '\n';
        }
    }
    write_text_file((root / "summary.csv").string(), summary.str());
    write_text_file((root / "aggregate.csv").string(), aggregate.str());
    return 0;
}

}  // namespace qdmeta
