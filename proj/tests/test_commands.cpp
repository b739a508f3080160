#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "qdmeta/commands.hpp"
#include "qdmeta/config.hpp"
#include "qdmeta/records.hpp"

using namespace qdmeta;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path write_config(const fs::path& dir, const std::string& algorithm, const std::string& extra = "") {
    const fs::path p = dir / (algorithm + ".ini");
    std::ofstream(p) << "[run]\nalgorithm = " << algorithm << "\noutput = " << (dir / ("out-" + algorithm)).string()
                     << "\n" << extra
                     << "\n[evolution]\neval_budget = 6000\ninit_population = 200\nbatch_size = 40\nbins_per_dim = 10\n"
                        "database_capacity = 10000\n[meta]\nlambda = 3\nactions = 1,2,4\n[cvt]\ncentroids = 32\n"
                        "kmeans_samples = 1000\n";
    return p;
}

}  // namespace

TEST_CASE("evolve writes deterministic outputs for every algorithm") {
    TempDir tmp("qdmeta_cmd_evolve");
    std::ostringstream log;
    for (const std::string alg : {"qd-meta-translation", "qd-meta-dimension", "cvt", "fixed-me"}) {
        CAPTURE(alg);
        const fs::path cfg = write_config(tmp.path, alg);
        const fs::path out = tmp.path / ("out-" + alg);
        CHECK(cmd_evolve({cfg.string()}, log) == 0);
        const std::string first = slurp(out / "metrics.csv");
        CHECK(first.size() > std::string(kHistoryHeader).size() + 1);
        CHECK(fs::exists(out / "archive.csv"));
        EvolveOptions again{cfg.string()};
        again.workers = 3;
        CHECK(cmd_evolve(again, log) == 0);
        CHECK(slurp(out / "metrics.csv") == first);
        const auto rows = load_history((out / "metrics.csv").string());
        CHECK(rows.back().evaluations == 6000);
    }
}

TEST_CASE("evolve rejects a bad config with the key named") {
    TempDir tmp("qdmeta_cmd_badcfg");
    const fs::path p = tmp.path / "bad.ini";
    std::ofstream(p) << "[run]\nalgorithm = cvt\n[evolution]\nbudget = 3\n";
    std::ostringstream log;
    try {
        cmd_evolve({p.string()}, log);
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("line 4: unknown key 'budget'") == 0);
    }
}

TEST_CASE("interrupt writes a checkpoint that resumes to the uninterrupted result") {
    TempDir tmp("qdmeta_cmd_resume");
    std::ostringstream log;
    const fs::path cfg = write_config(tmp.path, "qd-meta-translation");
    const fs::path out = tmp.path / "out-qd-meta-translation";
    REQUIRE(cmd_evolve({cfg.string()}, log) == 0);
    const std::string reference = slurp(out / "metrics.csv");
    const std::string reference_archive = slurp(out / "archive.csv");
    fs::remove_all(out);

    request_interrupt();
    CHECK(cmd_evolve({cfg.string()}, log) == kInterruptedExit);
    clear_interrupt();
    CHECK(fs::exists(out / "checkpoint" / "state.json"));

    EvolveOptions resume;
    resume.resume = (out / "checkpoint").string();
    CHECK(cmd_evolve(resume, log) == 0);
    CHECK(slurp(out / "metrics.csv") == reference);
    CHECK(slurp(out / "archive.csv") == reference_archive);
    CHECK_FALSE(fs::exists(out / "checkpoint"));
}

TEST_CASE("test command emits 120 curves per suite at the requested budget") {
    TempDir tmp("qdmeta_cmd_test");
    std::ostringstream log;
    const fs::path cfg = write_config(tmp.path, "fixed-me");
    REQUIRE(cmd_evolve({cfg.string()}, log) == 0);
    const fs::path archive = tmp.path / "out-fixed-me" / "archive.csv";
    for (const std::string suite : {"dimension", "translation"}) {
        TestOptions opts;
        opts.archive_path = archive.string();
        opts.suite = suite;
        opts.budget = 37;
        opts.out = (tmp.path / "test").string();
        CHECK(cmd_test(opts, log) == 0);
        std::ifstream in(tmp.path / "test" / ("curves_" + suite + ".csv"));
        std::string line;
        std::getline(in, line);
        std::size_t rows = 0;
        std::set<std::string> scenarios;
        while (std::getline(in, line)) {
            ++rows;
            scenarios.insert(split_csv(line)[0]);
        }
        CHECK(scenarios.size() == 120);
        CHECK(rows == 120 * 37);
    }
    std::ofstream(tmp.path / "corrupt.csv") << "# qdmeta-archive kind=grid dims=2 bins=10 genes=20 base=20\n1,2,x\n";
    TestOptions bad;
    bad.archive_path = (tmp.path / "corrupt.csv").string();
    try {
        cmd_test(bad, log);
        FAIL("expected an error");
    } catch (const std::exception& e) {
        CHECK(std::string(e.what()).find("line") != std::string::npos);
    }
    TestOptions unknown;
    unknown.archive_path = archive.string();
    unknown.suite = "robots";
    CHECK_THROWS(cmd_test(unknown, log));
}

// Finds the line starting with `label,` and compares its numeric fields.
static void check_row(const std::string& csv, const std::string& label, const std::vector<double>& expected) {
    std::istringstream in(csv);
    std::string line;
    while (std::getline(in, line)) {
        if (line.rfind(label + ",", 0) != 0) continue;
        std::istringstream fields(line.substr(label.size() + 1));
        std::string f;
        std::vector<double> got;
        while (std::getline(fields, f, ',')) got.push_back(std::stod(f));
        REQUIRE(got.size() == expected.size());
        for (std::size_t i = 0; i < got.size(); ++i) CHECK(got[i] == doctest::Approx(expected[i]).epsilon(1e-12));
        return;
    }
    FAIL("no row for " << label);
}

TEST_CASE("metrics summarises single runs and replicates") {
    TempDir tmp("qdmeta_cmd_metrics");
    std::ostringstream out;
    CHECK_THROWS(cmd_metrics(tmp.path.string(), out));

    fs::create_directories(tmp.path / "single");
    std::vector<HistoryRow> one{{0, 100, 0, 5, -10.0, -1.0, std::nullopt, 10, std::nullopt},
                                {1, 200, 0, 8, -7.5, -0.5, std::nullopt, 10, std::nullopt}};
    save_history((tmp.path / "single" / "metrics.csv").string(), one);

    fs::create_directories(tmp.path / "pair" / "rep_0");
    fs::create_directories(tmp.path / "pair" / "rep_1");
    std::vector<HistoryRow> a{{0, 100, 0, 4, -20.0, -2.0, 3.0, 5, 0.0}, {0, 100, 1, 6, -18.0, -1.0, 5.0, 5, 0.0}};
    std::vector<HistoryRow> b{{0, 100, 0, 10, -12.0, -3.0, 7.0, 5, 0.0}};
    save_history((tmp.path / "pair" / "rep_0" / "metrics.csv").string(), a);
    save_history((tmp.path / "pair" / "rep_1" / "metrics.csv").string(), b);

    CHECK(cmd_metrics(tmp.path.string(), out) == 0);
    const std::string summary = slurp(tmp.path / "summary.csv");
    // Single run: summary equals its final row.
    CHECK(summary.find("single,1,8,0,-7.5,0,-0.5,0,,\n") != std::string::npos);
    // Two replicates: final rows are the last rows (count 6 and 10, mean -18 and -12).
    check_row(summary, "pair", {2, 8, 2, -15, 3, -2, 1, 6, 1});
    const std::string aggregate = slurp(tmp.path / "aggregate.csv");
    check_row(aggregate, "pair", {0, 2, 100, 8, 2, -15, 3, -2, 1, 6, 1});
    CHECK(out.str().find("pair") != std::string::npos);
}
