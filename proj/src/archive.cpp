#include "qdmeta/archive.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace qdmeta {

std::size_t bin_index(std::span<const double> beta, std::size_t bins_per_dim) {
    std::size_t cell = 0;
    const double bins = static_cast<double>(bins_per_dim);
    for (double b : beta) {
        double scaled = std::floor(b * bins);
        std::size_t idx = scaled <= 0.0 ? 0 : static_cast<std::size_t>(scaled);
        idx = std::min(idx, bins_per_dim - 1);
        cell = cell * bins_per_dim + idx;
    }
    return cell;
}

ElitePool::ElitePool(std::size_t n_cells) : slot_of_cell_(n_cells, -1) {}

bool ElitePool::try_insert(std::size_t cell, const Solution& s) {
    std::int64_t& slot = slot_of_cell_.at(cell);
    if (slot < 0) {
        slot = static_cast<std::int64_t>(solutions_.size());
        solutions_.push_back(s);
        cells_.push_back(cell);
        return true;
    }
    Solution& incumbent = solutions_[static_cast<std::size_t>(slot)];
    if (s.fitness > incumbent.fitness) {
        incumbent = s;
        return true;
    }
    return false;
}

const Solution* ElitePool::at(std::size_t cell) const {
    std::int64_t slot = slot_of_cell_.at(cell);
    return slot < 0 ? nullptr : &solutions_[static_cast<std::size_t>(slot)];
}

const Solution& ElitePool::select_random(Rng& rng) const {
    if (solutions_.empty()) throw std::logic_error("cannot select from an empty archive");
    return solutions_[uniform_index(rng, solutions_.size())];
}

namespace {

std::size_t grid_cells(std::size_t dims, std::size_t bins) {
    if (dims == 0 || bins == 0) throw std::invalid_argument("grid needs at least one dimension and one bin");
    std::size_t n = 1;
    for (std::size_t d = 0; d < dims; ++d) {
        if (n > std::numeric_limits<std::size_t>::max() / bins) throw std::invalid_argument("grid too large");
        n *= bins;
    }
    return n;
}

}  // namespace

GridArchive::GridArchive(std::size_t dims, std::size_t bins_per_dim)
    : dims_(dims), bins_(bins_per_dim), pool_(grid_cells(dims, bins_per_dim)) {}

std::size_t GridArchive::cell_of(std::span<const double> beta) const {
    if (beta.size() != dims_) throw std::invalid_argument("target-feature length mismatch");
    return bin_index(beta, bins_);
}

bool GridArchive::try_insert(std::span<const double> beta, const Solution& s) {
    return pool_.try_insert(cell_of(beta), s);
}

std::size_t nearest_centroid(std::span<const double> point, const std::vector<std::vector<double>>& centroids) {
    if (centroids.empty()) throw std::invalid_argument("no centroids");
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < centroids.size(); ++c) {
        const auto& ctr = centroids[c];
        double d = 0.0;
        // Partial distance: abandon once no better than the incumbent. Strict
        // comparison keeps the lowest index on ties.
        for (std::size_t i = 0; i < point.size() && d < best_d; ++i) {
            double diff = point[i] - ctr[i];
            d += diff * diff;
        }
        if (d < best_d) {
            best_d = d;
            best = c;
        }
    }
    return best;
}

CvtArchive::CvtArchive(std::vector<std::vector<double>> centroids)
    : centroids_(std::move(centroids)), pool_(centroids_.size()) {
    if (centroids_.empty()) throw std::invalid_argument("CVT archive needs at least one centroid");
    const std::size_t dim = centroids_.front().size();
    matrix_.resize(static_cast<Eigen::Index>(centroids_.size()), static_cast<Eigen::Index>(dim));
    for (std::size_t c = 0; c < centroids_.size(); ++c) {
        if (centroids_[c].size() != dim) throw std::invalid_argument("centroids differ in dimension");
        for (std::size_t i = 0; i < dim; ++i) matrix_(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(i)) = centroids_[c][i];
    }
    norms_ = matrix_.rowwise().squaredNorm();
    max_norm_ = norms_.maxCoeff();
}

std::size_t CvtArchive::nearest(std::span<const double> point) const {
    if (point.size() != static_cast<std::size_t>(matrix_.cols())) {
        throw std::invalid_argument("point dimension does not match the centroids");
    }
    const Eigen::Map<const Eigen::VectorXd> x(point.data(), static_cast<Eigen::Index>(point.size()));
    // |c - x|^2 - |x|^2 = |c|^2 - 2 c.x; rounding can only reorder candidates
    // whose scores are within `slack` of the minimum, so those are re-checked exactly.
    const Eigen::VectorXd scores = norms_ - 2.0 * (matrix_ * x);
    const double best_score = scores.minCoeff();
    const double slack = 1e-9 * (1.0 + max_norm_ + x.squaredNorm());
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (Eigen::Index c = 0; c < scores.size(); ++c) {
        if (scores[c] > best_score + slack) continue;
        const auto& ctr = centroids_[static_cast<std::size_t>(c)];
        double d = 0.0;
        for (std::size_t i = 0; i < point.size(); ++i) {
            const double diff = point[i] - ctr[i];
            d += diff * diff;
        }
        if (d < best_d) {
            best_d = d;
            best = static_cast<std::size_t>(c);
        }
    }
    return best;
}

bool CvtArchive::try_insert(const Solution& s) { return pool_.try_insert(nearest(s.base_features), s); }

Genotype mutate_gaussian(const Genotype& g, double rate, double sigma, Rng& rng) {
    Genotype out = g;
    std::bernoulli_distribution mutate(rate);
    std::normal_distribution<double> step(0.0, sigma);
    for (double& gene : out.genes) {
        if (mutate(rng)) gene = std::clamp(gene + step(rng), 0.0, 1.0);
    }
    return out;
}

QdMetrics qd_metrics(std::span<const Solution> solutions) {
    QdMetrics m;
    m.count = solutions.size();
    if (solutions.empty()) return m;
    double sum = 0.0;
    double best = -std::numeric_limits<double>::infinity();
    for (const auto& s : solutions) {
        sum += s.fitness;
        best = std::max(best, s.fitness);
    }
    m.mean_fitness = sum / static_cast<double>(solutions.size());
    m.max_fitness = best;
    return m;
}

// --- serialisation --------------------------------------------------------

std::string format_double(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    if (ec != std::errc{}) throw std::runtime_error("failed to format double");
    return std::string(buf, ptr);
}

double parse_double(std::string_view text) {
    double v = 0.0;
    const char* first = text.data();
    const char* last = text.data() + text.size();
    while (first < last && *first == ' ') ++first;
    while (last > first && (last[-1] == ' ' || last[-1] == '\r')) --last;
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc{} || ptr != last) throw std::invalid_argument("not a number: '" + std::string(text) + "'");
    return v;
}

namespace {

ArchiveFile file_from_pool(const ElitePool& pool, std::string kind, std::size_t dims, std::size_t bins) {
    ArchiveFile f;
    f.kind = std::move(kind);
    f.dims = dims;
    f.bins = bins;
    const auto sols = pool.solutions();
    const auto cells = pool.cells();
    if (!sols.empty()) {
        f.n_genes = sols.front().genotype.size();
        f.n_base = sols.front().base_features.size();
    }
    f.cells.assign(cells.begin(), cells.end());
    f.solutions.assign(sols.begin(), sols.end());
    return f;
}

std::vector<std::string_view> split(std::string_view line, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        std::size_t pos = line.find(sep, start);
        if (pos == std::string_view::npos) {
            out.push_back(line.substr(start));
            break;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
    return out;
}

std::size_t parse_size(std::string_view text) {
    std::size_t v = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc{} || ptr != text.data() + text.size())
        throw std::invalid_argument("not an unsigned integer: '" + std::string(text) + "'");
    return v;
}

}  // namespace

ArchiveFile to_archive_file(const GridArchive& archive) {
    return file_from_pool(archive.pool(), "grid", archive.dims(), archive.bins_per_dim());
}

ArchiveFile to_archive_file(const CvtArchive& archive) {
    std::size_t dims = archive.centroids().front().size();
    return file_from_pool(archive.pool(), "cvt", dims, archive.capacity());
}

GridArchive grid_from_archive_file(const ArchiveFile& file) {
    if (file.kind != "grid") throw std::invalid_argument("archive file is not a grid archive");
    GridArchive archive(file.dims, file.bins);
    for (std::size_t i = 0; i < file.solutions.size(); ++i) {
        if (file.cells[i] >= archive.capacity()) throw std::invalid_argument("archive cell index out of range");
        archive.try_insert_cell(file.cells[i], file.solutions[i]);
    }
    return archive;
}

void write_archive(std::ostream& os, const ArchiveFile& file) {
    os << "# qdmeta-archive kind=" << file.kind << " dims=" << file.dims << " bins=" << file.bins
       << " genes=" << file.n_genes << " base=" << file.n_base << " count=" << file.solutions.size() << '\n';
    for (std::size_t i = 0; i < file.solutions.size(); ++i) {
        const Solution& s = file.solutions[i];
        os << file.cells[i] << ',' << format_double(s.fitness);
        for (double g : s.genotype.genes) os << ',' << format_double(g);
        for (double b : s.base_features) os << ',' << format_double(b);
        os << '\n';
    }
}

ArchiveFile read_archive(std::istream& is) {
    ArchiveFile f;
    std::string line;
    std::size_t line_no = 0;
    auto fail = [&](const std::string& what) -> void {
        throw std::runtime_error("archive line " + std::to_string(line_no) + ": " + what);
    };
    if (!std::getline(is, line)) {
        line_no = 1;
        fail("missing header");
    }
    line_no = 1;
    {
        auto fields = split(line, ' ');
        if (fields.size() < 2 || fields[0] != "#" || fields[1] != "qdmeta-archive") fail("bad header");
        std::size_t count = 0;
        bool has_count = false;
        for (std::size_t i = 2; i < fields.size(); ++i) {
            auto kv = split(fields[i], '=');
            if (kv.size() != 2) fail("bad header field '" + std::string(fields[i]) + "'");
            try {
                if (kv[0] == "kind") {
                    f.kind = std::string(kv[1]);
                } else if (kv[0] == "dims") {
                    f.dims = parse_size(kv[1]);
                } else if (kv[0] == "bins") {
                    f.bins = parse_size(kv[1]);
                } else if (kv[0] == "genes") {
                    f.n_genes = parse_size(kv[1]);
                } else if (kv[0] == "base") {
                    f.n_base = parse_size(kv[1]);
                } else if (kv[0] == "count") {
                    count = parse_size(kv[1]);
                    has_count = true;
                } else {
                    fail("unknown header field '" + std::string(kv[0]) + "'");
                }
            } catch (const std::invalid_argument& e) {
                fail(e.what());
            }
        }
        if (f.kind != "grid" && f.kind != "cvt") fail("unknown archive kind '" + f.kind + "'");
        if (has_count) f.solutions.reserve(count);
    }
    const std::size_t expected = 2 + f.n_genes + f.n_base;
    while (std::getline(is, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        auto fields = split(line, ',');
        if (fields.size() != expected) {
            fail("expected " + std::to_string(expected) + " fields, found " + std::to_string(fields.size()));
        }
        Solution s;
        std::size_t cell = 0;
        try {
            cell = parse_size(fields[0]);
            s.fitness = parse_double(fields[1]);
            s.genotype.genes.resize(f.n_genes);
            for (std::size_t i = 0; i < f.n_genes; ++i) s.genotype.genes[i] = parse_double(fields[2 + i]);
            s.base_features.resize(f.n_base);
            for (std::size_t i = 0; i < f.n_base; ++i) s.base_features[i] = parse_double(fields[2 + f.n_genes + i]);
        } catch (const std::invalid_argument& e) {
            fail(e.what());
        }
        for (double g : s.genotype.genes) {
            if (!(g >= 0.0 && g <= 1.0)) fail("gene outside [0,1]");
        }
        if (f.bins > 0 && f.kind == "cvt" && cell >= f.bins) fail("centroid index out of range");
        f.cells.push_back(cell);
        f.solutions.push_back(std::move(s));
    }
    return f;
}

void save_archive(const std::string& path, const ArchiveFile& file) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open '" + path + "' for writing");
    write_archive(os, file);
    if (!os) throw std::runtime_error("failed writing '" + path + "'");
}

ArchiveFile load_archive(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open '" + path + "'");
    return read_archive(is);
}

}  // namespace qdmeta
