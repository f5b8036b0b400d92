#include "alignlab/error.hpp"
#include "alignlab/metrics.hpp"
#include "generators.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

using namespace alignlab;
using alignlab::testing::correlated_pair;
using alignlab::testing::random_orthogonal;
using alignlab::testing::random_points;

namespace {

Matrix column(std::initializer_list<double> values) {
  Matrix m(static_cast<Index>(values.size()), 1);
  Index i = 0;
  for (double v : values) m(i++, 0) = v;
  return m;
}

double sq_dist(const Matrix& p, Index i, Index j) { return (p.row(i) - p.row(j)).squaredNorm(); }

// Exhaustive reference: r_ij = 1 + #{m != i : d_im < d_ij or (d_im == d_ij and m < j)}.
std::int32_t brute_rank(const Matrix& p, Index i, Index j) {
  std::int32_t closer = 0;
  for (Index m = 0; m < p.rows(); ++m) {
    if (m == i) continue;
    const double dm = sq_dist(p, i, m), dj = sq_dist(p, i, j);
    if (dm < dj || (dm == dj && m < j)) ++closer;
  }
  return closer + 1;
}

std::vector<std::int32_t> brute_conditional(const Matrix& a, const Matrix& b) {
  std::vector<std::int32_t> out;
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = 0; j < a.rows(); ++j)
      if (j != i && brute_rank(a, i, j) == 1) out.push_back(brute_rank(b, i, j));
  return out;
}

double brute_ii(const Matrix& a, const Matrix& b) {
  const auto n = static_cast<double>(a.rows());
  const auto c = brute_conditional(a, b);
  return 2.0 * std::accumulate(c.begin(), c.end(), 0.0) / (n * (n - 1.0));
}

template <typename F>
ErrorKind kind_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "expected an alignlab::Error";
  return ErrorKind::invalid_input;
}

}  // namespace

TEST(PointSet, RejectsNonFiniteAndEmpty) {
  Matrix m = Matrix::Zero(3, 2);
  m(1, 1) = std::nan("");
  EXPECT_EQ(kind_of([&] { PointSet p(m); }), ErrorKind::invalid_input);
  EXPECT_EQ(kind_of([&] { PointSet p(Matrix(0, 2)); }), ErrorKind::invalid_input);
}

TEST(RankTable, HandOrderedLine) {
  const RankTable t = pairwise_rank_table(PointSet(column({0, 1, 3})));
  EXPECT_EQ(t.neighbor(0, 0), 1);
  EXPECT_EQ(t.neighbor(0, 1), 2);
  EXPECT_EQ(t.neighbor(2, 0), 1);
  EXPECT_EQ(t.neighbor(2, 1), 0);
  EXPECT_EQ(t.rank(0, 2), 2);
  EXPECT_EQ(t.rank(1, 0), 1);
}

TEST(RankTable, DuplicatesRankFirstAndTiesBreakByIndex) {
  Matrix p(3, 2);
  p << 0, 0, 0, 0, 1, 1;
  const RankTable t = pairwise_rank_table(PointSet(p));
  EXPECT_EQ(t.neighbor(0, 0), 1);
  EXPECT_EQ(t.neighbor(0, 1), 2);

  Matrix q(4, 1);
  q << 5, 5, 5, 9;
  const RankTable u = pairwise_rank_table(PointSet(q));
  EXPECT_EQ(u.neighbor(2, 0), 0);
  EXPECT_EQ(u.neighbor(2, 1), 1);
  EXPECT_EQ(u.neighbor(3, 0), 0);
}

TEST(RankTable, RowsArePermutations) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Matrix p = random_points(7, 3, seed);
    const RankTable t = pairwise_rank_table(PointSet(p));
    for (Index i = 0; i < 7; ++i) {
      std::vector<bool> seen(7, false);
      for (std::int32_t j : t.row(i)) {
        ASSERT_NE(j, i);
        ASSERT_FALSE(seen[static_cast<std::size_t>(j)]);
        seen[static_cast<std::size_t>(j)] = true;
      }
    }
  }
}

TEST(RankTable, TooFewPoints) {
  EXPECT_EQ(kind_of([] { pairwise_rank_table(PointSet(column({0, 1}))); }), ErrorKind::too_few_points);
}

// Property: rank tables agree with the exhaustive definition for N <= 8,
// including sets with heavy ties (integer grids).
TEST(BruteForceOracle, RanksConditionalRanksAndImbalance) {
  Rng meta = make_rng(99);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = alignlab::testing::random_int(meta, 3, 8);
    const int dim = alignlab::testing::random_int(meta, 1, 3);
    Matrix a = random_points(n, dim, 1000 + trial);
    Matrix b = random_points(n, dim, 5000 + trial);
    if (trial % 3 == 0) {
      a = a.array().round();
      b = b.array().round();
    }
    const RankTable ta = pairwise_rank_table(PointSet(a));
    const RankTable tb = pairwise_rank_table(PointSet(b));
    for (Index i = 0; i < n; ++i)
      for (Index j = 0; j < n; ++j)
        if (i != j) ASSERT_EQ(ta.rank(i, j), brute_rank(a, i, j)) << "trial " << trial;

    const ConditionalRanks c = conditional_ranks(ta, tb);
    EXPECT_EQ(c.values, brute_conditional(a, b)) << "trial " << trial;
    const ConditionalRankPair direct = conditional_ranks_direct(PointSet(a), PointSet(b));
    EXPECT_EQ(direct.a_to_b.values, c.values);
    EXPECT_EQ(direct.b_to_a.values, conditional_ranks(tb, ta).values);
    EXPECT_EQ(information_imbalance(ta, tb), brute_ii(a, b));
  }
}

TEST(ConditionalRanks, ReversedLine) {
  const Matrix a = column({0, 1, 2, 3, 4});
  const Matrix b = column({4, 3, 2, 1, 0});
  // Reversal is an isometry of the line, so every nearest neighbour keeps rank 1.
  const auto c = conditional_ranks(pairwise_rank_table(PointSet(a)), pairwise_rank_table(PointSet(b)));
  EXPECT_EQ(c.values, brute_conditional(a, b));
  const Matrix shuffled = column({2, 0, 4, 1, 3});
  const auto d = conditional_ranks(pairwise_rank_table(PointSet(a)), pairwise_rank_table(PointSet(shuffled)));
  EXPECT_EQ(d.values, brute_conditional(a, shuffled));
}

TEST(ConditionalRanks, IndependentSpacesAreUniform) {
  const Index n = 2000;
  const auto c = conditional_ranks_direct(PointSet(random_points(n, 2, 1)), PointSet(random_points(n, 2, 2)));
  const int bins = 10;
  std::vector<double> counts(bins, 0.0);
  for (std::int32_t r : c.a_to_b.values) counts[static_cast<std::size_t>((r - 1) * bins / (n - 1))] += 1.0;
  double chi2 = 0.0;
  const double expected = static_cast<double>(n) / bins;
  for (double o : counts) chi2 += (o - expected) * (o - expected) / expected;
  EXPECT_LT(chi2, 21.67);  // chi-square 0.99 quantile, 9 degrees of freedom
}

TEST(InformationImbalance, IdenticalSpaces) {
  const RankTable t = pairwise_rank_table(PointSet(random_points(101, 3, 4)));
  EXPECT_NEAR(information_imbalance(t, t), 0.02, 1e-15);
}

TEST(InformationImbalance, IndependentGaussianLines) {
  const RankTable a = pairwise_rank_table(PointSet(random_points(1000, 1, 5)));
  const RankTable b = pairwise_rank_table(PointSet(random_points(1000, 1, 6)));
  EXPECT_NEAR(information_imbalance(a, b), 1.0, 0.05);
}

TEST(InformationImbalance, MismatchedSizes) {
  const RankTable a = pairwise_rank_table(PointSet(random_points(5, 1, 5)));
  const RankTable b = pairwise_rank_table(PointSet(random_points(6, 1, 6)));
  EXPECT_EQ(kind_of([&] { information_imbalance(a, b); }), ErrorKind::shape);
}

// Property: isotropic scaling, translation and orthogonal maps leave ranks
// and every derived statistic unchanged.
TEST(Invariance, ScaleAndOrthogonalTransforms) {
  Rng meta = make_rng(7);
  for (int trial = 0; trial < 25; ++trial) {
    const int n = alignlab::testing::random_int(meta, 3, 60);
    const int dim = alignlab::testing::random_int(meta, 1, 6);
    const double beta = alignlab::testing::random_real(meta, 0.01, 100.0);
    const Matrix p = random_points(n, dim, 300 + trial);
    const Matrix u = random_orthogonal(dim, 700 + trial);
    const RankTable base = pairwise_rank_table(PointSet(p));
    EXPECT_TRUE(pairwise_rank_table(PointSet(beta * p)) == base) << "scale, trial " << trial;
    EXPECT_TRUE(pairwise_rank_table(PointSet(p * u)) == base) << "rotation, trial " << trial;
    EXPECT_TRUE(pairwise_rank_table(PointSet(beta * p * u)) == base) << "both, trial " << trial;
  }
  const Matrix a = random_points(500, 4, 1);
  const Matrix b = 0.5 * a + random_points(500, 4, 2);
  const AlignmentScore s0 = cce_between(PointSet(a), PointSet(b));
  const AlignmentScore s1 = cce_between(PointSet(3.0 * a * random_orthogonal(4, 3)), PointSet(0.25 * b));
  EXPECT_EQ(s0.cce_ab, s1.cce_ab);
  EXPECT_EQ(s0.cce_ba, s1.cce_ba);
  EXPECT_EQ(s0.ii_ab, s1.ii_ab);
  EXPECT_EQ(s0.ii_ba, s1.ii_ba);
}

TEST(CceBins, EdgesAndCount) {
  EXPECT_EQ(cce_bin_count(401), 20);
  EXPECT_EQ(cce_bin_count(2000), 44);
  EXPECT_EQ(cce_bin_of(1, 401, 20), 0);
  EXPECT_EQ(cce_bin_of(400, 401, 20), 19);
  // Bin width (N-2)/M = 19.95: rank 20 is still in bin 0, rank 21 in bin 1.
  EXPECT_EQ(cce_bin_of(20, 401, 20), 0);
  EXPECT_EQ(cce_bin_of(21, 401, 20), 1);
  int previous = 0;
  for (std::int32_t r = 1; r <= 400; ++r) {
    const int bin = cce_bin_of(r, 401, 20);
    EXPECT_GE(bin, previous);
    EXPECT_LE(bin - previous, 1);
    previous = bin;
  }
}

TEST(CceEstimate, DeltaSaturatesAtLogM) {
  ConditionalRanks c{std::vector<std::int32_t>(401, 1), 401};
  EXPECT_NEAR(cce_estimate(c, 401), std::log(20.0), 1e-12);
}

TEST(CceEstimate, UniformIsZero) {
  ConditionalRanks c{{}, 401};
  for (std::int32_t r = 1; r <= 400; ++r) c.values.push_back(r);
  // 400 ranks over 20 bins of width 19.95 are not exactly balanced; build an
  // exactly balanced sample instead: one rank per bin centre, repeated.
  ConditionalRanks balanced{{}, 401};
  for (int m = 0; m < 20; ++m)
    for (int rep = 0; rep < 5; ++rep) balanced.values.push_back(static_cast<std::int32_t>(1 + m * 20 + 5));
  EXPECT_EQ(cce_estimate(balanced, 401), 0.0);
  EXPECT_LT(cce_estimate(c, 401), 1e-3);
}

TEST(CceEstimate, Errors) {
  ConditionalRanks c{{1, 2, 3}, 8};
  EXPECT_EQ(kind_of([&] { cce_estimate(c, 8); }), ErrorKind::too_few_points);
  ConditionalRanks bad{{1, 0, 3}, 10};
  EXPECT_EQ(kind_of([&] { cce_estimate(bad, 10); }), ErrorKind::invalid_input);
  ConditionalRanks high{{1, 10}, 10};
  EXPECT_EQ(kind_of([&] { cce_estimate(high, 10); }), ErrorKind::invalid_input);
}

// Property: estimate stays in [0, log M] and II in [2/(N-1), 2].
TEST(CceEstimate, RangeProperty) {
  Rng meta = make_rng(11);
  for (int trial = 0; trial < 30; ++trial) {
    const int n = alignlab::testing::random_int(meta, 9, 400);
    const double rho = alignlab::testing::random_real(meta, -0.99, 0.99);
    auto [a, b] = correlated_pair(n, rho, 40 + trial);
    const AlignmentScore s = cce_between(PointSet(a), PointSet(b));
    const double log_m = std::log(static_cast<double>(s.n_bins));
    for (double v : {s.cce_ab, s.cce_ba}) {
      EXPECT_GE(v, 0.0);
      EXPECT_LE(v, log_m);
    }
    for (double v : {s.ii_ab, s.ii_ba}) {
      EXPECT_GE(v, 2.0 / (n - 1) - 1e-15);
      EXPECT_LE(v, 2.0);
    }
  }
}

TEST(CceEstimate, GaussianRho08) {
  auto [a, b] = correlated_pair(10000, 0.8, 17);
  const auto c = conditional_ranks_direct(PointSet(a), PointSet(b));
  EXPECT_NEAR(cce_estimate(c.a_to_b, 10000), 0.19083, 0.03);
}

TEST(CceBetween, IdenticalSpaces) {
  const Matrix p = random_points(300, 3, 8);
  const AlignmentScore s = cce_between(PointSet(p), PointSet(p));
  EXPECT_EQ(s.n_bins, 17);
  EXPECT_DOUBLE_EQ(s.cce_ab, std::log(17.0));
  EXPECT_DOUBLE_EQ(s.cce_ba, std::log(17.0));
  EXPECT_DOUBLE_EQ(s.ii_ab, 2.0 / 299.0);
}

TEST(CceBetween, IndependentGaussiansNearZero) {
  const AlignmentScore s =
      cce_between(PointSet(random_points(2000, 5, 21)), PointSet(random_points(2000, 5, 22)));
  EXPECT_LT(s.cce_ab, 0.02);
  EXPECT_LT(s.cce_ba, 0.02);
}

TEST(CceBetween, RankOneHiddenEqualsProjection) {
  const Matrix z = random_points(800, 1, 31);
  Vector r = random_points(10, 1, 32).col(0);
  r /= r.norm();
  const Matrix hidden = z * r.transpose();
  const Matrix other = 0.6 * z + 0.8 * random_points(800, 1, 33);
  const AlignmentScore lifted = cce_between(PointSet(hidden), PointSet(other));
  const AlignmentScore flat = cce_between(PointSet(z), PointSet(other));
  EXPECT_EQ(lifted.cce_ab, flat.cce_ab);
  EXPECT_EQ(lifted.cce_ba, flat.cce_ba);
}

TEST(CceBetween, SubsampleIsSeededAndValidated) {
  const Matrix a = random_points(500, 2, 1), b = random_points(500, 2, 2);
  const AlignmentScore s1 = cce_between(PointSet(a), PointSet(b), 100, 5);
  const AlignmentScore s2 = cce_between(PointSet(a), PointSet(b), 100, 5);
  EXPECT_EQ(s1.cce_ab, s2.cce_ab);
  EXPECT_EQ(s1.n_points, 100);
  EXPECT_EQ(s1.n_bins, 10);
  EXPECT_EQ(kind_of([&] { cce_between(PointSet(a), PointSet(b), 8, 0); }), ErrorKind::invalid_input);
  EXPECT_EQ(kind_of([&] { cce_between(PointSet(a), PointSet(b), 501, 0); }), ErrorKind::invalid_input);
  EXPECT_EQ(kind_of([&] { cce_between(PointSet(a), PointSet(random_points(499, 2, 3))); }), ErrorKind::shape);
}

TEST(GaussianClosedForm, Values) {
  EXPECT_EQ(cce_gaussian_closed_form(0.0), 0.0);
  EXPECT_NEAR(cce_gaussian_closed_form(0.8), 0.19083, 1e-5);
  EXPECT_EQ(cce_gaussian_closed_form(-0.8), cce_gaussian_closed_form(0.8));
  EXPECT_EQ(kind_of([] { cce_gaussian_closed_form(1.0); }), ErrorKind::domain);
  EXPECT_EQ(kind_of([] { cce_gaussian_closed_form(-1.5); }), ErrorKind::domain);
}

TEST(IiLowerBound, Values) {
  EXPECT_NEAR(ii_lower_bound(0.0), 0.73576, 1e-5);
  EXPECT_NEAR(ii_lower_bound(0.19083), 2.0 * std::exp(-1.19083), 1e-15);
  EXPECT_NEAR(ii_lower_bound(0.19083), 0.60794, 1e-5);
  EXPECT_EQ(ii_lower_bound(std::numeric_limits<double>::infinity()), 0.0);
  EXPECT_EQ(kind_of([] { ii_lower_bound(-0.1); }), ErrorKind::domain);
}

// Property: Eq. 2 with 10% slack and direction symmetry on Gaussian pairs.
TEST(GaussianPairs, BoundAndSymmetry) {
  for (double rho : {0.3, 0.6, 0.9}) {
    for (std::uint64_t seed = 0; seed < 3; ++seed) {
      auto [a, b] = correlated_pair(10000, rho, 100 * seed + static_cast<std::uint64_t>(rho * 10));
      const AlignmentScore s = cce_between(PointSet(a), PointSet(b));
      EXPECT_GE(s.ii_ab, 0.9 * ii_lower_bound(s.cce_ab)) << "rho " << rho;
      EXPECT_GE(s.ii_ba, 0.9 * ii_lower_bound(s.cce_ba)) << "rho " << rho;
      EXPECT_LE(std::abs(s.cce_ab - s.cce_ba), 0.03) << "rho " << rho;
    }
  }
}
