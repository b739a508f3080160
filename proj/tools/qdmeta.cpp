// qdmeta command-line entry point: evolve, test and metrics subcommands.

#include <csignal>
#include <cstdint>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "qdmeta/commands.hpp"
#include "qdmeta/config.hpp"

namespace {

extern "C" void on_sigint(int) { qdmeta::request_interrupt(); }

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Quality-diversity meta-evolution experiments on the Rastrigin benchmark"};
    app.require_subcommand(1);

    qdmeta::EvolveOptions evolve;
    std::uint64_t seed = 0;
    std::size_t workers = 1;
    std::string out;
    std::uint64_t budget = 0;
    std::string resume;
    auto* ev = app.add_subcommand("evolve", "Run an algorithm from a config file");
    ev->add_option("--config", evolve.config_path, "Config file (key=value with sections)");
    auto* ev_seed = ev->add_option("--seed", seed, "Master seed (overrides [run] seed)");
    auto* ev_workers = ev->add_option("--workers", workers, "Worker threads")->check(CLI::PositiveNumber);
    auto* ev_out = ev->add_option("--out", out, "Output directory");
    auto* ev_budget = ev->add_option("--budget", budget, "Evaluation budget")->check(CLI::PositiveNumber);
    auto* ev_resume = ev->add_option("--resume", resume, "Resume from a checkpoint directory");
    ev->callback([&] {
        if (evolve.config_path.empty() && ev_resume->count() == 0) {
            throw CLI::RequiredError("--config or --resume");
        }
    });

    qdmeta::TestOptions test;
    auto* te = app.add_subcommand("test", "Adaptation test of an archive dump on a perturbed-landscape suite");
    te->add_option("archive", test.archive_path, "Archive file")->required();
    te->add_option("--suite", test.suite, "dimension or translation")
        ->check(CLI::IsMember({"dimension", "translation"}));
    te->add_option("--budget", test.budget, "Evaluations per scenario")->check(CLI::PositiveNumber);
    te->add_option("--seed", test.seed, "Seed");
    te->add_option("--out", test.out, "Output directory");
    te->add_option("--workers", test.workers, "Worker threads")->check(CLI::PositiveNumber);

    std::string run_dir;
    auto* me = app.add_subcommand("metrics", "Summarise and aggregate metric CSVs below a directory");
    me->add_option("run_directory", run_dir, "Directory holding metrics.csv files")->required();

    CLI11_PARSE(app, argc, argv);

    std::signal(SIGINT, on_sigint);
    try {
        if (ev->parsed()) {
            if (ev_seed->count()) evolve.seed = seed;
            if (ev_workers->count()) evolve.workers = workers;
            if (ev_out->count()) evolve.out = out;
            if (ev_budget->count()) evolve.budget = budget;
            if (ev_resume->count()) evolve.resume = resume;
            return qdmeta::cmd_evolve(evolve, std::cout);
        }
        if (te->parsed()) return qdmeta::cmd_test(test, std::cout);
        return qdmeta::cmd_metrics(run_dir, std::cout);
    } catch (const qdmeta::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
