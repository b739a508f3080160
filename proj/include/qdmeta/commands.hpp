#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

namespace qdmeta {

struct EvolveOptions {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> workers;
    std::optional<std::string> out;
    std::optional<std::uint64_t> budget;
    std::optional<std::string> resume;  // checkpoint directory; replaces config_path
};

struct TestOptions {
    std::string archive_path;
    std::string suite = "dimension";  // dimension | translation
    std::size_t budget = 100;
    std::uint64_t seed = 1;
    std::string out = ".";
    std::size_t workers = 1;
};

/// Exit status returned when a run stops on an interrupt after checkpointing.
inline constexpr int kInterruptedExit = 130;

/// Asks running commands to stop at the next safe point. Async-signal-safe.
void request_interrupt();
bool interrupt_requested();
void clear_interrupt();

/// Runs the configured algorithm and writes metrics.csv, archive.csv and (for
/// QD-Meta) control.csv plus checkpoints. Returns 0, or kInterruptedExit.
/// Configuration and I/O problems are reported by exception.
int cmd_evolve(const EvolveOptions& options, std::ostream& log);

/// Writes curves_<suite>.csv and summary_<suite>.csv for one archive dump.
int cmd_test(const TestOptions& options, std::ostream& log);

/// Summarises every metrics.csv under `run_directory`; writes summary.csv and
/// aggregate.csv there. Throws std::runtime_error when none are found.
int cmd_metrics(const std::string& run_directory, std::ostream& out);

}  // namespace qdmeta
