#pragma once

// Metric rows shared by every algorithm and their CSV form.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qdmeta/evaluation.hpp"

namespace qdmeta {

struct HistoryRow {
    std::size_t meta_generation = 0;
    std::uint64_t evaluations = 0;
    std::size_t individual_id = 0;
    std::size_t archive_count = 0;
    std::optional<double> mean_fitness;
    std::optional<double> max_fitness;
    std::optional<double> meta_fitness;
    std::optional<int> generations_action;
    std::optional<double> reward;

    bool operator==(const HistoryRow&) const = default;
};

struct ControlTraceRow {
    std::size_t meta_generation = 0;
    std::size_t state = 0;
    int generations = 0;
    double reward = 0.0;
    double max_meta_fitness = 0.0;
    std::size_t leaf_count = 1;

    bool operator==(const ControlTraceRow&) const = default;
};

inline constexpr const char* kHistoryHeader =
    "meta_generation,evaluations,individual_id,archive_count,mean_fitness,max_fitness,meta_fitness,"
    "generations_action,reward";
inline constexpr const char* kControlHeader = "meta_generation,state,generations,reward,max_meta_fitness,leaf_count";

void write_history(std::ostream& os, std::span<const HistoryRow> rows);
/// Throws std::runtime_error naming the line on malformed input.
std::vector<HistoryRow> read_history(std::istream& is);
void save_history(const std::string& path, std::span<const HistoryRow> rows);
std::vector<HistoryRow> load_history(const std::string& path);

void write_control_trace(std::ostream& os, std::span<const ControlTraceRow> rows);
std::vector<ControlTraceRow> read_control_trace(std::istream& is);

/// Long format: scenario_id,eval_index,best_so_far (eval_index starts at 1).
void write_curves(std::ostream& os, std::span<const AdaptationCurve> curves);
/// eval_index,mean,se,n
void write_curve_summary(std::ostream& os, const CurveSummary& summary);

/// Splits one CSV line on commas (no quoting is ever produced by this library).
std::vector<std::string> split_csv(const std::string& line);

void write_text_file(const std::string& path, const std::string& text);

}  // namespace qdmeta
