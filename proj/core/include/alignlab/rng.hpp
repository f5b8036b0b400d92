#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <initializer_list>
#include <random>
#include <vector>

namespace alignlab {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

using Rng = std::mt19937_64;

/// Named sub-streams of a master seed. Each consumer of randomness in an
/// experiment cell draws from its own stream so that, e.g., the two training
/// sets of a pair are independent and individually reproducible.
enum class Stream : std::uint64_t {
  teacher = 1,
  dataset_a = 2,
  dataset_b = 3,
  test_set = 4,
  subsample = 5,
  init_a = 6,
  init_b = 7,
  gauge = 8,
  noise_a = 9,
  noise_b = 10,
  split = 11,
  shuffle_a = 12,
  shuffle_b = 13,
};

/// Counter-based seed split: folds each path element into the state with a
/// SplitMix64 finalizer. Distinct paths give statistically independent seeds.
std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> path);

inline std::uint64_t derive_seed(std::uint64_t master, Stream stream) {
  return derive_seed(master, {static_cast<std::uint64_t>(stream)});
}

inline Rng make_rng(std::uint64_t seed) { return Rng(seed); }

/// rows x cols matrix of i.i.d. N(0, stddev^2).
Matrix gaussian_matrix(Index rows, Index cols, double stddev, Rng& rng);
Vector gaussian_vector(Index size, double stddev, Rng& rng);

/// `count` distinct indices from [0, population), sorted ascending.
std::vector<Index> sample_without_replacement(Index population, Index count, Rng& rng);

}  // namespace alignlab
