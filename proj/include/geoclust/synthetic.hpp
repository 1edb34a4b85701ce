#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "geoclust/dissimilarity.hpp"
#include "geoclust/types.hpp"

namespace geoclust {

// Deterministic synthetic data for tests, examples and benchmarks. All
// generators are pure functions of (n, seed) via a seeded 64-bit Mersenne
// twister, so fixtures are reproducible run to run.

// Group membership convention shared by the planted generators: entity i
// belongs to group i % 2 (groups interleaved, sizes differ by at most one).
std::vector<int> planted_groups(std::size_t n);

// Two-group dataset separated in every channel the pipeline can see:
// features near (0,0) vs (1,1) with +/-0.002 jitter, coordinates near
// (45N,5E) vs (52N,12E) with +/-0.005 deg jitter, and an 11-year "output"
// series (2013-2023) running at level 1 vs 5 (slope 0.3/year, +/-0.0005
// jitter). Uniform weights; one metadata column "group" with values
// "g0"/"g1" for pass-through checks.
Dataset planted_dataset(std::size_t n, std::uint64_t seed);

// Raw (un-normalized) two-group dissimilarity matrix on the same group
// convention: within-group entries uniform in [0.001, 0.01], between-group
// entries uniform in [1.0, 1.3]. Symmetric, zero diagonal.
DissimilarityMatrix planted_matrix(std::size_t n, std::uint64_t seed, const std::string& label);

// Raw unstructured matrix: off-diagonal entries uniform in [lo, hi].
DissimilarityMatrix noise_matrix(std::size_t n, std::uint64_t seed, double lo, double hi,
                                 const std::string& label);

// Normalized unstructured matrix (noise in [0.05, 1], then max-scaled).
DissimilarityMatrix random_matrix(std::size_t n, std::uint64_t seed, const std::string& label);

// Unstructured dataset with realistic shape: coordinates in western Europe,
// three feature columns in [0,1], three series variables "v1".."v3" whose
// per-entity lengths vary between 4 and 11 years, all ending in 2023 (so
// every pair of entities overlaps in time), values following a random walk.
// One metadata column "tag" with non-numeric values. Uniform weights.
Dataset random_dataset(std::size_t n, std::uint64_t seed);

}  // namespace geoclust
