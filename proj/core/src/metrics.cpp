#include "alignlab/metrics.hpp"

#include "alignlab/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace alignlab {

namespace {

using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using RowVector = Eigen::Matrix<double, 1, Eigen::Dynamic>;

// Coordinates stored dimension-major (D x N) so the distance sweep from one
// point to all others vectorises over points.
class DistanceRows {
 public:
  explicit DistanceRows(const PointSet& points) : coords_(points.points().transpose()) {}

  Index size() const { return coords_.cols(); }

  // Squared Euclidean distances from point i to every point; summation order
  // over dimensions is fixed so every caller sees identical values.
  void fill(Index i, RowVector& out) const {
    out.setZero(coords_.cols());
    for (Index k = 0; k < coords_.rows(); ++k)
      out.array() += (coords_.row(k).array() - coords_(k, i)).square();
  }

 private:
  RowMajor coords_;
};

void require_rankable(Index n) {
  if (n < 3)
    fail(ErrorKind::too_few_points,
         "rank statistics need at least 3 points, got " + std::to_string(n));
}

Index nearest_other(const RowVector& dist, Index i) {
  Index best = (i == 0) ? 1 : 0;
  for (Index j = best + 1; j < dist.size(); ++j) {
    if (j == i) continue;
    if (dist(j) < dist(best)) best = j;
  }
  return best;
}

// 1-based rank of j among the neighbours of i under (distance, index) order.
std::int32_t rank_of(const RowVector& dist, Index i, Index j) {
  const double dj = dist(j);
  std::int32_t closer = 0;
  for (Index m = 0; m < dist.size(); ++m) {
    if (m == i) continue;
    const double dm = dist(m);
    if (dm < dj || (dm == dj && m < j)) ++closer;
  }
  return closer + 1;
}

void require_same_size(Index a, Index b) {
  if (a != b)
    fail(ErrorKind::shape, "representations have different point counts: " + std::to_string(a) +
                               " vs " + std::to_string(b));
}

}  // namespace

PointSet::PointSet(Matrix points) : points_(std::move(points)) {
  if (points_.rows() < 1 || points_.cols() < 1)
    fail(ErrorKind::invalid_input, "point set must have at least one point and one dimension");
  if (!points_.allFinite()) fail(ErrorKind::invalid_input, "point set contains non-finite values");
}

PointSet PointSet::subset(std::span<const Index> indices) const {
  Matrix out(static_cast<Index>(indices.size()), dim());
  for (std::size_t r = 0; r < indices.size(); ++r) {
    if (indices[r] < 0 || indices[r] >= size())
      fail(ErrorKind::invalid_input, "subset index out of range");
    out.row(static_cast<Index>(r)) = points_.row(indices[r]);
  }
  return PointSet(std::move(out));
}

RankTable::RankTable(Index n, std::vector<std::int32_t> neighbors)
    : n_(n), neighbors_(std::move(neighbors)), ranks_(static_cast<std::size_t>(n * n), 0) {
  require_rankable(n);
  if (neighbors_.size() != static_cast<std::size_t>(n * (n - 1)))
    fail(ErrorKind::shape, "rank table storage does not match N x (N-1)");
  for (Index i = 0; i < n; ++i)
    for (Index m = 0; m < n - 1; ++m)
      ranks_[static_cast<std::size_t>(i * n + neighbor(i, m))] = static_cast<std::int32_t>(m + 1);
}

RankTable pairwise_rank_table(const PointSet& points) {
  const Index n = points.size();
  require_rankable(n);
  DistanceRows rows(points);
  std::vector<std::int32_t> neighbors(static_cast<std::size_t>(n * (n - 1)));
  std::vector<std::int32_t> order(static_cast<std::size_t>(n - 1));
  RowVector dist;
  for (Index i = 0; i < n; ++i) {
    rows.fill(i, dist);
    std::size_t w = 0;
    for (Index j = 0; j < n; ++j)
      if (j != i) order[w++] = static_cast<std::int32_t>(j);
    std::sort(order.begin(), order.end(), [&](std::int32_t p, std::int32_t q) {
      return dist(p) < dist(q) || (dist(p) == dist(q) && p < q);
    });
    std::copy(order.begin(), order.end(), neighbors.begin() + i * (n - 1));
  }
  return RankTable(n, std::move(neighbors));
}

ConditionalRanks conditional_ranks(const RankTable& rank_a, const RankTable& rank_b) {
  require_same_size(rank_a.size(), rank_b.size());
  const Index n = rank_a.size();
  ConditionalRanks out;
  out.n_points = n;
  out.values.resize(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) out.values[static_cast<std::size_t>(i)] = rank_b.rank(i, rank_a.neighbor(i, 0));
  return out;
}

ConditionalRankPair conditional_ranks_direct(const PointSet& a, const PointSet& b) {
  require_same_size(a.size(), b.size());
  const Index n = a.size();
  require_rankable(n);
  DistanceRows rows_a(a);
  DistanceRows rows_b(b);
  ConditionalRankPair out;
  out.a_to_b.n_points = n;
  out.b_to_a.n_points = n;
  out.a_to_b.values.resize(static_cast<std::size_t>(n));
  out.b_to_a.values.resize(static_cast<std::size_t>(n));
  RowVector da, db;
  for (Index i = 0; i < n; ++i) {
    rows_a.fill(i, da);
    rows_b.fill(i, db);
    out.a_to_b.values[static_cast<std::size_t>(i)] = rank_of(db, i, nearest_other(da, i));
    out.b_to_a.values[static_cast<std::size_t>(i)] = rank_of(da, i, nearest_other(db, i));
  }
  return out;
}

double information_imbalance(const ConditionalRanks& cond) {
  const auto n = static_cast<double>(cond.n_points);
  require_rankable(cond.n_points);
  if (cond.values.size() != static_cast<std::size_t>(cond.n_points))
    fail(ErrorKind::shape, "conditional rank count does not match n_points");
  const double sum = std::accumulate(cond.values.begin(), cond.values.end(), 0.0);
  return 2.0 * sum / (n * (n - 1.0));
}

double information_imbalance(const RankTable& rank_a, const RankTable& rank_b) {
  return information_imbalance(conditional_ranks(rank_a, rank_b));
}

int cce_bin_count(Index n_points) {
  return static_cast<int>(std::floor(std::sqrt(static_cast<double>(n_points))));
}

int cce_bin_of(std::int32_t rank, Index n_points, int n_bins) {
  // Edges 1 + m (N-2)/M; exact in integers: m = floor((r-1) M / (N-2)).
  const std::int64_t span = n_points - 2;
  const std::int64_t bin = (static_cast<std::int64_t>(rank) - 1) * n_bins / span;
  return static_cast<int>(std::min<std::int64_t>(bin, n_bins - 1));
}

double cce_estimate(const ConditionalRanks& cond, Index n_points) {
  if (n_points < 9)
    fail(ErrorKind::too_few_points,
         "CCE estimate needs n_points >= 9 (at least 3 bins), got " + std::to_string(n_points));
  if (cond.values.empty()) fail(ErrorKind::invalid_input, "no conditional ranks");
  const int bins = cce_bin_count(n_points);
  std::vector<std::int64_t> counts(static_cast<std::size_t>(bins), 0);
  for (std::int32_t r : cond.values) {
    if (r < 1 || r > n_points - 1)
      fail(ErrorKind::invalid_input, "conditional rank " + std::to_string(r) +
                                         " outside [1, " + std::to_string(n_points - 1) + "]");
    ++counts[static_cast<std::size_t>(cce_bin_of(r, n_points, bins))];
  }
  const auto total = static_cast<double>(cond.values.size());
  double neg_entropy = 0.0;
  for (std::int64_t c : counts) {
    if (c == 0) continue;
    const double p = static_cast<double>(c) / total;
    neg_entropy += p * std::log(p);
  }
  const double log_m = std::log(static_cast<double>(bins));
  return std::clamp(log_m + neg_entropy, 0.0, log_m);
}

AlignmentScore cce_between(const PointSet& a, const PointSet& b, std::optional<Index> subsample,
                           std::uint64_t seed) {
  require_same_size(a.size(), b.size());
  ConditionalRankPair ranks;
  Index n = a.size();
  if (subsample && *subsample != n) {
    if (*subsample < 9 || *subsample > n)
      fail(ErrorKind::invalid_input, "subsample " + std::to_string(*subsample) +
                                         " must lie in [9, " + std::to_string(n) + "]");
    Rng rng = make_rng(seed);
    const auto rows = sample_without_replacement(n, *subsample, rng);
    ranks = conditional_ranks_direct(a.subset(rows), b.subset(rows));
    n = *subsample;
  } else {
    ranks = conditional_ranks_direct(a, b);
  }
  AlignmentScore score;
  score.n_points = n;
  score.n_bins = cce_bin_count(n);
  score.cce_ab = cce_estimate(ranks.a_to_b, n);
  score.cce_ba = cce_estimate(ranks.b_to_a, n);
  score.ii_ab = information_imbalance(ranks.a_to_b);
  score.ii_ba = information_imbalance(ranks.b_to_a);
  return score;
}

double cce_gaussian_closed_form(double rho) {
  if (!(std::abs(rho) < 1.0))
    fail(ErrorKind::domain, "correlation must satisfy |rho| < 1, got " + std::to_string(rho));
  const double r2 = rho * rho;
  return -0.5 * std::log1p(-r2) - 0.5 * r2;
}

double ii_lower_bound(double cce) {
  if (std::isnan(cce) || cce < 0.0)
    fail(ErrorKind::domain, "CCE must be non-negative, got " + std::to_string(cce));
  return 2.0 * std::exp(-cce - 1.0);
}

}  // namespace alignlab
