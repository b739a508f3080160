#pragma once

// Behaviour-performance maps: the grid archive indexed by target-features and
// the CVT archive indexed by nearest centroid, plus the variation operators and
// QD metrics shared by every algorithm.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qdmeta/domain.hpp"
#include "qdmeta/rng.hpp"

namespace qdmeta {

struct Solution {
    Genotype genotype;
    std::vector<double> base_features;
    double fitness = 0.0;

    bool operator==(const Solution&) const = default;
};

/// Row-major flattened cell of a regular grid over [0,1]^dims.
std::size_t bin_index(std::span<const double> beta, std::size_t bins_per_dim);

/// Storage shared by both archive kinds: solutions in first-occupation order
/// plus a dense cell -> slot table.
class ElitePool {
public:
    explicit ElitePool(std::size_t n_cells = 0);

    /// Stores `s` in `cell` iff the cell is empty or s.fitness is strictly higher.
    bool try_insert(std::size_t cell, const Solution& s);

    const Solution* at(std::size_t cell) const;
    std::span<const Solution> solutions() const { return solutions_; }
    std::span<const std::size_t> cells() const { return cells_; }
    std::size_t size() const { return solutions_.size(); }
    bool empty() const { return solutions_.empty(); }
    std::size_t cell_count() const { return slot_of_cell_.size(); }

    /// Uniform over occupied cells. Throws std::logic_error when empty.
    const Solution& select_random(Rng& rng) const;

    bool operator==(const ElitePool&) const = default;

private:
    std::vector<std::int64_t> slot_of_cell_;
    std::vector<Solution> solutions_;
    std::vector<std::size_t> cells_;
};

class GridArchive {
public:
    GridArchive(std::size_t dims, std::size_t bins_per_dim);

    std::size_t dims() const { return dims_; }
    std::size_t bins_per_dim() const { return bins_; }
    std::size_t capacity() const { return pool_.cell_count(); }

    std::size_t cell_of(std::span<const double> beta) const;
    bool try_insert(std::span<const double> beta, const Solution& s);
    bool try_insert_cell(std::size_t cell, const Solution& s) { return pool_.try_insert(cell, s); }

    const ElitePool& pool() const { return pool_; }
    std::span<const Solution> solutions() const { return pool_.solutions(); }
    std::size_t size() const { return pool_.size(); }
    bool empty() const { return pool_.empty(); }
    const Solution& select_random(Rng& rng) const { return pool_.select_random(rng); }

    bool operator==(const GridArchive&) const = default;

private:
    std::size_t dims_;
    std::size_t bins_;
    ElitePool pool_;
};

/// Index of the Euclidean-nearest centroid; ties go to the lowest index.
std::size_t nearest_centroid(std::span<const double> point, const std::vector<std::vector<double>>& centroids);

class CvtArchive {
public:
    explicit CvtArchive(std::vector<std::vector<double>> centroids);

    const std::vector<std::vector<double>>& centroids() const { return centroids_; }
    std::size_t capacity() const { return centroids_.size(); }

    /// Same answer as nearest_centroid(point, centroids()), computed through a
    /// matrix-vector product with an exact re-check of near-ties.
    std::size_t nearest(std::span<const double> point) const;

    /// Inserts by nearest centroid of the solution's base-features.
    bool try_insert(const Solution& s);

    const ElitePool& pool() const { return pool_; }
    std::span<const Solution> solutions() const { return pool_.solutions(); }
    std::size_t size() const { return pool_.size(); }
    bool empty() const { return pool_.empty(); }
    const Solution& select_random(Rng& rng) const { return pool_.select_random(rng); }

private:
    std::vector<std::vector<double>> centroids_;
    Eigen::MatrixXd matrix_;       // k x dim
    Eigen::VectorXd norms_;        // |c|^2 per centroid
    double max_norm_ = 0.0;
    ElitePool pool_;
};

/// Each gene is perturbed with probability `rate` by N(0, sigma^2), then clamped to [0,1].
Genotype mutate_gaussian(const Genotype& g, double rate, double sigma, Rng& rng);

struct QdMetrics {
    std::size_t count = 0;
    std::optional<double> mean_fitness;
    std::optional<double> max_fitness;
};

QdMetrics qd_metrics(std::span<const Solution> solutions);

struct KMeansResult {
    std::vector<std::vector<double>> centroids;
    std::vector<double> objective_history;  // within-cluster sum of squares after each iteration
    int iterations = 0;
};

/// Lloyd k-means on `n_samples` uniform points in [0,1]^dim, initialised from a
/// uniform random subset of the samples.
KMeansResult kmeans_uniform(std::size_t k, std::size_t n_samples, std::size_t dim, Rng& rng,
                            int max_iterations = 50, double relative_tolerance = 1e-6);

/// Lloyd k-means on the given samples.
KMeansResult kmeans(const std::vector<std::vector<double>>& samples, std::size_t k, Rng& rng,
                    int max_iterations = 50, double relative_tolerance = 1e-6);

std::vector<std::vector<double>> build_centroids(std::size_t k, std::size_t n_samples, std::size_t dim, Rng& rng);

// --- line-oriented archive dumps -------------------------------------------

/// One archive dump: a header line, then `cell,fitness,genes...,base...` per solution.
struct ArchiveFile {
    std::string kind = "grid";  // "grid" or "cvt"
    std::size_t dims = 0;       // grid: target dims; cvt: base-feature dims
    std::size_t bins = 0;       // grid: bins per dim; cvt: centroid count
    std::size_t n_genes = 0;
    std::size_t n_base = 0;
    std::vector<std::size_t> cells;
    std::vector<Solution> solutions;
};

ArchiveFile to_archive_file(const GridArchive& archive);
ArchiveFile to_archive_file(const CvtArchive& archive);
GridArchive grid_from_archive_file(const ArchiveFile& file);

void write_archive(std::ostream& os, const ArchiveFile& file);
/// Throws std::runtime_error naming the offending line on malformed input.
ArchiveFile read_archive(std::istream& is);

void save_archive(const std::string& path, const ArchiveFile& file);
ArchiveFile load_archive(const std::string& path);

/// Shortest round-trip decimal representation of a double.
std::string format_double(double v);
/// Parses a double written by format_double; throws std::invalid_argument otherwise.
double parse_double(std::string_view text);

}  // namespace qdmeta
