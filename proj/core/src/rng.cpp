#include "alignlab/rng.hpp"

#include "alignlab/error.hpp"

#include <algorithm>
#include <numeric>
#include <vector>

namespace alignlab {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> path) {
  std::uint64_t state = splitmix64(master);
  for (std::uint64_t p : path) state = splitmix64(state ^ splitmix64(p + 0x632be59bd9b4e019ULL));
  return state;
}

Matrix gaussian_matrix(Index rows, Index cols, double stddev, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix m(rows, cols);
  // Fill row by row so a matrix with more rows extends one with fewer.
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) m(i, j) = stddev * normal(rng);
  return m;
}

Vector gaussian_vector(Index size, double stddev, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector v(size);
  for (Index i = 0; i < size; ++i) v(i) = stddev * normal(rng);
  return v;
}

std::vector<Index> sample_without_replacement(Index population, Index count, Rng& rng) {
  if (count < 0 || count > population)
    fail(ErrorKind::invalid_input, "cannot draw " + std::to_string(count) + " of " +
                                       std::to_string(population) + " items");
  std::vector<Index> all(static_cast<std::size_t>(population));
  std::iota(all.begin(), all.end(), Index{0});
  // Partial Fisher-Yates with an explicit uniform draw keeps the result
  // independent of std::shuffle's implementation.
  for (Index i = 0; i < count; ++i) {
    std::uniform_int_distribution<Index> pick(i, population - 1);
    std::swap(all[static_cast<std::size_t>(i)], all[static_cast<std::size_t>(pick(rng))]);
  }
  all.resize(static_cast<std::size_t>(count));
  std::sort(all.begin(), all.end());
  return all;
}

}  // namespace alignlab
