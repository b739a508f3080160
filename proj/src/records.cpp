#include "qdmeta/records.hpp"

#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "qdmeta/archive.hpp"

namespace qdmeta {

namespace {

template <typename T>
void put(std::ostream& os, const std::optional<T>& v) {
    if (!v) return;
    if constexpr (std::is_floating_point_v<T>) {
        os << format_double(*v);
    } else {
        os << *v;
    }
}

std::runtime_error line_error(std::size_t line, const std::string& what) {
    return std::runtime_error("line " + std::to_string(line) + ": " + what);
}

std::uint64_t parse_uint(const std::string& text) {
    if (text.empty() || text.find_first_not_of("0123456789") != std::string::npos) {
        throw std::invalid_argument("not an unsigned integer: '" + text + "'");
    }
    return std::stoull(text);
}

std::optional<double> opt_double(const std::string& text) {
    if (text.empty()) return std::nullopt;
    return parse_double(text);
}

template <typename F>
void for_data_lines(std::istream& is, const char* header, std::size_t n_fields, F&& f) {
    std::string line;
    std::size_t line_no = 0;
    if (!std::getline(is, line)) throw line_error(1, "missing header");
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != header) throw line_error(1, "unexpected header '" + line + "'");
    while (std::getline(is, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto fields = split_csv(line);
        if (fields.size() != n_fields) {
            throw line_error(line_no, "expected " + std::to_string(n_fields) + " fields, found " +
                                          std::to_string(fields.size()));
        }
        try {
            f(fields);
        } catch (const std::invalid_argument& e) {
            throw line_error(line_no, e.what());
        }
    }
}

}  // namespace

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        out.push_back(line.substr(start, comma == std::string::npos ? std::string::npos : comma - start));
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    return out;
}

void write_history(std::ostream& os, std::span<const HistoryRow> rows) {
    os << kHistoryHeader << '\n';
    for (const HistoryRow& r : rows) {
        os << r.meta_generation << ',' << r.evaluations << ',' << r.individual_id << ',' << r.archive_count << ',';
        put(os, r.mean_fitness);
        os << ',';
        put(os, r.max_fitness);
        os << ',';
        put(os, r.meta_fitness);
        os << ',';
        put(os, r.generations_action);
        os << ',';
        put(os, r.reward);
        os << '\n';
    }
}

std::vector<HistoryRow> read_history(std::istream& is) {
    std::vector<HistoryRow> rows;
    for_data_lines(is, kHistoryHeader, 9, [&](const std::vector<std::string>& f) {
        HistoryRow r;
        r.meta_generation = parse_uint(f[0]);
        r.evaluations = parse_uint(f[1]);
        r.individual_id = parse_uint(f[2]);
        r.archive_count = parse_uint(f[3]);
        r.mean_fitness = opt_double(f[4]);
        r.max_fitness = opt_double(f[5]);
        r.meta_fitness = opt_double(f[6]);
        if (!f[7].empty()) r.generations_action = static_cast<int>(parse_uint(f[7]));
        r.reward = opt_double(f[8]);
        rows.push_back(r);
    });
    return rows;
}

void save_history(const std::string& path, std::span<const HistoryRow> rows) {
    std::ostringstream os;
    write_history(os, rows);
    write_text_file(path, os.str());
}

std::vector<HistoryRow> load_history(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    try {
        return read_history(in);
    } catch (const std::runtime_error& e) {
        throw std::runtime_error(path + ": " + e.what());
    }
}

void write_control_trace(std::ostream& os, std::span<const ControlTraceRow> rows) {
    os << kControlHeader << '\n';
    for (const auto& r : rows) {
        os << r.meta_generation << ',' << r.state << ',' << r.generations << ',' << format_double(r.reward) << ','
           << format_double(r.max_meta_fitness) << ',' << r.leaf_count << '\n';
    }
}

std::vector<ControlTraceRow> read_control_trace(std::istream& is) {
    std::vector<ControlTraceRow> rows;
    for_data_lines(is, kControlHeader, 6, [&](const std::vector<std::string>& f) {
        ControlTraceRow r;
        r.meta_generation = parse_uint(f[0]);
        r.state = parse_uint(f[1]);
        r.generations = static_cast<int>(parse_uint(f[2]));
        r.reward = parse_double(f[3]);
        r.max_meta_fitness = parse_double(f[4]);
        r.leaf_count = parse_uint(f[5]);
        rows.push_back(r);
    });
    return rows;
}

void write_curves(std::ostream& os, std::span<const AdaptationCurve> curves) {
    os << "scenario_id,eval_index,best_so_far\n";
    for (const auto& c : curves) {
        for (std::size_t k = 0; k < c.best_so_far.size(); ++k) {
            os << c.scenario_id << ',' << (k + 1) << ',' << format_double(c.best_so_far[k]) << '\n';
        }
    }
}

void write_curve_summary(std::ostream& os, const CurveSummary& s) {
    os << "eval_index,mean,se,n\n";
    for (std::size_t k = 0; k < s.mean.size(); ++k) {
        os << (k + 1) << ',' << format_double(s.mean[k]) << ',' << format_double(s.standard_error[k]) << ','
           << s.n_curves << '\n';
    }
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << text;
    if (!out) throw std::runtime_error("write failed for " + path);
}

}  // namespace qdmeta
