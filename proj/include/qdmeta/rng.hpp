#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace qdmeta {

using Rng = std::mt19937_64;

/// SplitMix64 finaliser; used to decorrelate derived seeds.
std::uint64_t splitmix64(std::uint64_t x);

/// Seed of a named, indexed stream derived from a master seed.
///
/// Every unit of work (initial population, one meta-individual in one
/// meta-generation, one test scenario, ...) draws from its own stream, so the
/// order in which workers execute never perturbs results.
std::uint64_t stream_seed(std::uint64_t master, std::string_view name, std::uint64_t a = 0,
                          std::uint64_t b = 0);

inline Rng make_stream(std::uint64_t master, std::string_view name, std::uint64_t a = 0,
                       std::uint64_t b = 0) {
    return Rng{stream_seed(master, name, a, b)};
}

inline double uniform01(Rng& rng) { return std::uniform_real_distribution<double>{0.0, 1.0}(rng); }

inline double uniform(Rng& rng, double lo, double hi) {
    return std::uniform_real_distribution<double>{lo, hi}(rng);
}

/// Uniform integer in [0, n).
inline std::size_t uniform_index(Rng& rng, std::size_t n) {
    return std::uniform_int_distribution<std::size_t>{0, n - 1}(rng);
}

inline double standard_normal(Rng& rng) { return std::normal_distribution<double>{0.0, 1.0}(rng); }

}  // namespace qdmeta
