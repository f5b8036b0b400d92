#include "alignlab/error.hpp"
#include "alignlab/theory.hpp"

#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <Eigen/QR>

#include <cmath>
#include <limits>

using namespace alignlab;

namespace {

const double kInf = std::numeric_limits<double>::infinity();

Spectrum flat_spectrum(Index rank, Index d, double lambda) {
  return {std::vector<double>(static_cast<std::size_t>(rank), lambda), d};
}

Spectrum empirical_spectrum(Index n, Index d, std::uint64_t seed) {
  const Matrix x = sample_inputs(n, d, seed);
  const Eigen::SelfAdjointEigenSolver<Matrix> es(x.transpose() * x);
  Spectrum s;
  s.d = d;
  for (Index i = d - 1; i >= 0; --i)
    if (es.eigenvalues()(i) > 1e-10 * es.eigenvalues()(d - 1)) s.eigenvalues.push_back(es.eigenvalues()(i));
  return s;
}

}  // namespace

TEST(RhoStar, SpotValues) {
  EXPECT_NEAR(rho_star(2.0, 1.0), 0.5, 1e-15);
  EXPECT_NEAR(rho_star(0.5, 1.0), 1.0 / 6.0, 1e-15);
  EXPECT_EQ(rho_star(1.0, 5.0), 0.0);
  for (double alpha : {0.3, 1.0, 3.0}) EXPECT_EQ(rho_star(alpha, 0.0), 0.0);
  EXPECT_EQ(rho_star(2.0, kInf), 1.0);
  EXPECT_EQ(rho_star(0.4, kInf), 0.4);
  EXPECT_THROW(rho_star(-1.0, 1.0), Error);
  EXPECT_THROW(rho_star(2.0, -1.0), Error);
}

// Property: 0 <= rho* <= 1, non-decreasing in SNR on both sides of alpha = 1.
TEST(RhoStar, RangeAndMonotonicity) {
  for (double alpha : {0.1, 0.5, 0.9, 1.1, 2.0, 10.0}) {
    double previous = 0.0;
    for (double snr : {0.0, 0.1, 0.5, 1.0, 5.0, 50.0, kInf}) {
      const double r = rho_star(alpha, snr);
      EXPECT_GE(r, previous);
      EXPECT_GE(r, 0.0);
      EXPECT_LE(r, 1.0);
      previous = r;
    }
  }
}

TEST(CceTheory, SpotValues) {
  EXPECT_NEAR(cce_theory(2.0, 1.0), 0.018841, 1e-6);
  EXPECT_NEAR(cce_theory(2.0, 5.0), 0.24562, 1e-4);
  EXPECT_EQ(cce_theory(1.0, 7.0), 0.0);
  EXPECT_EQ(cce_theory(2.0, kInf), kInf);
}

TEST(MarchenkoPastur, EdgesDensityAndZeroMass) {
  const MpEdges e = mp_edges(1.0);
  EXPECT_EQ(e.lower, 0.0);
  EXPECT_EQ(e.upper, 4.0);
  EXPECT_EQ(mp_density(5.0, 1.0), 0.0);
  EXPECT_EQ(mp_density(0.01, 2.0), 0.0);
  EXPECT_NEAR(mp_density(1.0, 1.0), std::sqrt(3.0) / (2.0 * std::numbers::pi), 1e-15);
  EXPECT_EQ(mp_zero_mass(2.0), 0.0);
  EXPECT_EQ(mp_zero_mass(0.25), 0.75);
  EXPECT_EQ(mp_zero_mass(1.0), 0.0);
  EXPECT_THROW(mp_density(1.0, 0.0), Error);
}

TEST(MarchenkoPastur, MassesSumToOne) {
  for (double alpha : {0.1, 0.25, 0.5, 0.9, 1.0, 1.1, 2.0, 4.0, 10.0})
    EXPECT_NEAR(mp_bulk_mass(alpha) + mp_zero_mass(alpha), 1.0, 1e-6) << alpha;
  EXPECT_NEAR(mp_bulk_mass(0.5), 0.5, 1e-6);
  EXPECT_NEAR(mp_bulk_mass(1.0), 1.0, 1e-6);
}

TEST(MarchenkoPastur, InverseMomentMatchesClosedForm) {
  for (double alpha : {0.2, 0.5, 0.8, 1.25, 2.0, 4.0}) {
    const double closed = mp_bulk_inverse_moment_closed(alpha);
    EXPECT_NEAR(mp_bulk_inverse_moment(alpha), closed, 1e-6 * std::max(1.0, closed)) << alpha;
  }
  EXPECT_NEAR(mp_bulk_inverse_moment(2.0), 1.0, 1e-3);
  try {
    mp_bulk_inverse_moment(1.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::divergent);
  }
}

TEST(MarchenkoPastur, FirstMomentIsAlpha) {
  // E[lambda] over the full law equals alpha for x ~ N(0, I/d).
  for (double alpha : {0.3, 1.0, 3.0})
    EXPECT_NEAR(mp_bulk_integral(alpha, [](double l) { return l; }), alpha, 1e-8);
}

TEST(MarchenkoPastur, CdfIsMonotone) {
  const double alpha = 0.5;
  double previous = 0.0;
  for (double l = 0.0; l <= 3.5; l += 0.05) {
    const double c = mp_cdf(l, alpha);
    EXPECT_GE(c, previous - 1e-12);
    previous = c;
  }
  EXPECT_NEAR(mp_cdf(0.0, alpha), 0.5, 1e-12);
  EXPECT_NEAR(mp_cdf(10.0, alpha), 1.0, 1e-6);
}

TEST(GenErrorAsymptotic, SpotValues) {
  EXPECT_NEAR(gen_error_asymptotic(2.0, 1.0, 0.2), 0.4, 1e-3);
  EXPECT_NEAR(gen_error_asymptotic(0.5, 1.0, 0.2), 0.9, 1e-3);
  EXPECT_NEAR(gen_error_asymptotic(3.0, 1.0, 0.0), 0.0, 1e-9);
  EXPECT_NEAR(gen_error_asymptotic(4.0, 1.0, 0.2), 0.2 * 4.0 / 3.0, 1e-6);
  EXPECT_NEAR(gen_error_asymptotic(0.25, 2.0, 0.5), 0.75 * 2.0 + 0.5 / 0.75, 1e-6);
  try {
    gen_error_asymptotic(1.0, 1.0, 0.2);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::divergent);
  }
  EXPECT_EQ(gen_error_asymptotic(1.0, 1.0, 0.0), 0.0);
}

TEST(TheoryPoint, ThresholdRowIsInfinite) {
  const TheoryPoint p = theory_point(1.0, 1.0);
  EXPECT_EQ(p.gen_error, kInf);
  EXPECT_EQ(p.cce, 0.0);
  const TheoryPoint q = theory_point(2.0, 5.0);
  EXPECT_NEAR(q.rho_star, 5.0 / 6.0, 1e-15);
  EXPECT_NEAR(q.gen_error, 0.4, 1e-6);
  EXPECT_GE(q.gen_error, q.sigma_eps2);
}

TEST(RhoFinite, AlgebraicCases) {
  const Spectrum s = flat_spectrum(10, 20, 2.0);
  EXPECT_DOUBLE_EQ(rho_finite(s, s, 1.0, 0.0), 1.0);
  EXPECT_DOUBLE_EQ(rho_finite(s, s, 1.0, 0.5), 1.0 / (1.0 + 0.5 / 2.0));
  EXPECT_THROW(rho_finite(s, flat_spectrum(9, 20, 2.0), 1.0, 0.5), Error);
  Spectrum zero = s;
  zero.eigenvalues.back() = 0.0;
  EXPECT_THROW(rho_finite(zero, s, 1.0, 0.5), Error);
}

TEST(RhoFinite, EmpiricalSpectraApproachLimit) {
  const Spectrum a = empirical_spectrum(400, 200, 1);
  const Spectrum b = empirical_spectrum(400, 200, 2);
  EXPECT_NEAR(rho_finite(a, b, 1.0, 1.0), rho_star(2.0, 1.0), 0.03);
}

TEST(GenErrorFinite, AlgebraicCasesAndLimit) {
  EXPECT_DOUBLE_EQ(gen_error_finite(flat_spectrum(10, 10, 1.0), 1.0, 0.3), 0.6);
  EXPECT_DOUBLE_EQ(gen_error_finite(flat_spectrum(10, 10, 3.0), 1.0, 0.0), 0.0);
  EXPECT_DOUBLE_EQ(gen_error_finite(flat_spectrum(5, 10, 3.0), 1.0, 0.0), 0.5);
  EXPECT_NEAR(gen_error_finite(empirical_spectrum(400, 200, 3), 1.0, 0.2), 0.4, 0.02);
}

TEST(Oracle, NoiselessRecoversTeacher) {
  const Teacher t = sample_teacher({30, 1.0, 0.0}, 1);
  const RegressionDataset data = sample_dataset(t, 90, 2);
  const OracleSolution o = v_star_oracle(data);
  EXPECT_LE((o.total_map() - t.w_star).norm() / t.w_star.norm(), 1e-8);
  EXPECT_EQ(o.spectrum.rank(), 30);
}

TEST(Oracle, MinimumNormWhenUnderdetermined) {
  const Teacher t = sample_teacher({40, 1.0, 0.3}, 3);
  const RegressionDataset data = sample_dataset(t, 15, 4);
  const OracleSolution o = v_star_oracle(data);
  EXPECT_EQ(o.spectrum.rank(), 15);
  const Eigen::JacobiSVD<Matrix> svd(data.x, Eigen::ComputeFullV);
  const Matrix null_basis = svd.matrixV().rightCols(25);
  EXPECT_LE((null_basis.transpose() * o.total_map()).norm(), 1e-10);
  // Interpolates the training labels.
  EXPECT_LE((data.x * o.total_map() - data.y).norm(), 1e-9 * data.y.norm());
  const Vector pinv = data.x.completeOrthogonalDecomposition().solve(data.y);
  EXPECT_LE((pinv - o.total_map()).norm(), 1e-9 * pinv.norm());
}

TEST(Oracle, SpectrumIsSortedAndValid) {
  const RegressionDataset data = sample_dataset(sample_teacher({25, 1.0, 0.3}, 5), 60, 6);
  const OracleSolution o = v_star_oracle(data);
  EXPECT_NO_THROW(o.spectrum.validate());
  for (Index i = 1; i < o.all_eigenvalues.size(); ++i)
    EXPECT_LE(o.all_eigenvalues(i), o.all_eigenvalues(i - 1));
}

TEST(Oracle, ZeroDataIsDegenerate) {
  RegressionDataset data{Matrix::Zero(5, 3), Vector::Ones(5)};
  try {
    v_star_oracle(data);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::degenerate_input);
  }
}
