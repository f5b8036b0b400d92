#pragma once

// Rank-based alignment statistics between two representations of the same
// N inputs: distance-rank tables, Information Imbalance, conditional ranks
// and the histogram estimate of the Conditional Copula Entropy (CCE).
//
// Conventions used throughout:
//  * distances are Euclidean; ranks are computed from squared distances,
//    which preserves the ordering exactly;
//  * equal distances are ordered by ascending point index;
//  * ranks r_ij live in {1, ..., N-1} (the self pair is excluded);
//  * logarithms are natural, so entropies are in nats.

#include "alignlab/rng.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace alignlab {

/// N x D matrix of finite reals, one row per point.
class PointSet {
 public:
  explicit PointSet(Matrix points);

  Index size() const { return points_.rows(); }
  Index dim() const { return points_.cols(); }
  const Matrix& points() const { return points_; }

  /// Rows selected by `indices`, in the given order.
  PointSet subset(std::span<const Index> indices) const;

 private:
  Matrix points_;
};

/// For every point i, the indices of all other points ordered from nearest to
/// farthest. Memory is O(N^2): intended for N up to a few thousand.
class RankTable {
 public:
  RankTable(Index n, std::vector<std::int32_t> neighbors);

  Index size() const { return n_; }

  /// Index of the m-th nearest neighbour of i, m in [0, N-2].
  Index neighbor(Index i, Index m) const {
    return neighbors_[static_cast<std::size_t>(i * (n_ - 1) + m)];
  }
  std::span<const std::int32_t> row(Index i) const {
    return {neighbors_.data() + i * (n_ - 1), static_cast<std::size_t>(n_ - 1)};
  }
  /// r_ij in {1, ..., N-1}; i != j.
  std::int32_t rank(Index i, Index j) const {
    return ranks_[static_cast<std::size_t>(i * n_ + j)];
  }

  friend bool operator==(const RankTable& a, const RankTable& b) {
    return a.n_ == b.n_ && a.neighbors_ == b.neighbors_;
  }

 private:
  Index n_;
  std::vector<std::int32_t> neighbors_;  // N x (N-1), row-major
  std::vector<std::int32_t> ranks_;      // N x N, diagonal unused (0)
};

/// For each source point i, the rank in the target space of i's nearest
/// neighbour in the source space.
struct ConditionalRanks {
  std::vector<std::int32_t> values;
  Index n_points = 0;
};

/// Both directions of conditional ranks between two spaces.
struct ConditionalRankPair {
  ConditionalRanks a_to_b;
  ConditionalRanks b_to_a;
};

struct AlignmentScore {
  double cce_ab = 0.0;
  double cce_ba = 0.0;
  double ii_ab = 0.0;
  double ii_ba = 0.0;
  Index n_points = 0;
  int n_bins = 0;
};

RankTable pairwise_rank_table(const PointSet& points);

/// Delta(A -> B) = 2/(N(N-1)) * sum over pairs with r^A_ij = 1 of r^B_ij.
double information_imbalance(const RankTable& rank_a, const RankTable& rank_b);
double information_imbalance(const ConditionalRanks& cond);

ConditionalRanks conditional_ranks(const RankTable& rank_a, const RankTable& rank_b);

/// Same values as conditional_ranks() on both directions, computed row by row
/// in O(N^2 D) time and O(N) memory without materialising rank tables.
ConditionalRankPair conditional_ranks_direct(const PointSet& a, const PointSet& b);

/// Histogram bin count M = floor(sqrt(n_points)).
int cce_bin_count(Index n_points);

/// Bin of rank r among M equal-width bins over [1, N-1]; the last bin is
/// right-closed.
int cce_bin_of(std::int32_t rank, Index n_points, int n_bins);

/// log M + sum_i p_i log p_i over the histogram of conditional ranks, clamped
/// to [0, log M]. Requires n_points >= 9.
double cce_estimate(const ConditionalRanks& cond, Index n_points);

/// Full bidirectional score. With `subsample`, the same seeded subset of rows
/// is taken from both spaces before ranking.
AlignmentScore cce_between(const PointSet& a, const PointSet& b,
                           std::optional<Index> subsample = std::nullopt,
                           std::uint64_t seed = 0);

/// CCE of two jointly Gaussian 1-D variables with correlation rho:
/// -1/2 log(1 - rho^2) - rho^2 / 2.
double cce_gaussian_closed_form(double rho);

/// 2 exp(-cce - 1): lower bound on the Information Imbalance implied by a CCE.
double ii_lower_bound(double cce);

}  // namespace alignlab
