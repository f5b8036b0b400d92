#include "alignlab/error.hpp"
#include "alignlab/teacher_student.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

using namespace alignlab;

TEST(Teacher, ZeroVarianceGivesZeroWeights) {
  const Teacher t = sample_teacher({200, 0.0, 1.0}, 3);
  EXPECT_EQ(t.w_star.squaredNorm(), 0.0);
}

TEST(Teacher, WeightVarianceConcentrates) {
  double total = 0.0;
  for (std::uint64_t seed = 0; seed < 100; ++seed)
    total += sample_teacher({200, 1.0, 0.2}, seed).w_star.squaredNorm() / 200.0;
  const double mean = total / 100.0;
  EXPECT_GE(mean, 0.95);
  EXPECT_LE(mean, 1.05);
}

TEST(Teacher, Deterministic) {
  EXPECT_EQ(sample_teacher({50, 1.0, 0.2}, 9).w_star, sample_teacher({50, 1.0, 0.2}, 9).w_star);
  EXPECT_NE(sample_teacher({50, 1.0, 0.2}, 9).w_star, sample_teacher({50, 1.0, 0.2}, 10).w_star);
}

TEST(Teacher, ConfigValidation) {
  EXPECT_THROW(sample_teacher({0, 1.0, 0.2}, 0), Error);
  EXPECT_THROW(sample_teacher({10, -1.0, 0.2}, 0), Error);
  EXPECT_THROW(sample_teacher({10, 0.0, 0.0}, 0), Error);
}

TEST(Dataset, NoiselessLabelsAreExact) {
  const Teacher t = sample_teacher({30, 1.0, 0.0}, 1);
  const RegressionDataset data = sample_dataset(t, 50, 2);
  EXPECT_EQ((data.y - data.x * t.w_star).cwiseAbs().maxCoeff(), 0.0);
}

TEST(Dataset, InputNormAndLabelVariance) {
  const Teacher t = sample_teacher({200, 1.0, 0.2}, 4);
  const RegressionDataset data = sample_dataset(t, 10000, 5);
  const double mean_norm = data.x.rowwise().squaredNorm().mean();
  EXPECT_GE(mean_norm, 0.97);
  EXPECT_LE(mean_norm, 1.03);
  // Conditioned on one teacher, var(y) = |w*|^2 / d + sigma_eps2.
  const double var_y = (data.y.array() - data.y.mean()).square().mean();
  EXPECT_GE(var_y, 1.1 - 0.1);
  EXPECT_LE(var_y, 1.3 + 0.1);
  EXPECT_NEAR(var_y, t.w_star.squaredNorm() / 200.0 + 0.2, 0.06);
}

TEST(Dataset, LabelVarianceAveragedOverTeachers) {
  double total = 0.0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Teacher t = sample_teacher({200, 1.0, 0.2}, 100 + seed);
    const RegressionDataset data = sample_dataset(t, 10000, 200 + seed);
    total += (data.y.array() - data.y.mean()).square().mean();
  }
  const double mean = total / 20.0;
  EXPECT_GE(mean, 1.1);
  EXPECT_LE(mean, 1.3);
}

TEST(Dataset, ReproducibleAndIndependent) {
  const Teacher t = sample_teacher({40, 1.0, 1.0}, 7);
  const RegressionDataset a = sample_dataset(t, 2000, 8);
  const RegressionDataset a2 = sample_dataset(t, 2000, 8);
  const RegressionDataset b = sample_dataset(t, 2000, 9);
  EXPECT_EQ(a.x, a2.x);
  EXPECT_EQ(a.y, a2.y);
  // Cross-covariance of independent label vectors: within 3 standard errors of 0.
  const Vector ya = a.y.array() - a.y.mean();
  const Vector yb = b.y.array() - b.y.mean();
  const double cov = ya.dot(yb) / 2000.0;
  const double se = std::sqrt(ya.squaredNorm() / 2000.0 * yb.squaredNorm() / 2000.0 / 2000.0);
  EXPECT_LT(std::abs(cov), 3.0 * se);
}

TEST(Dataset, InputsDoNotDependOnNoiseLevel) {
  const Teacher quiet = sample_teacher({20, 1.0, 0.0}, 1);
  const Teacher noisy = sample_teacher({20, 1.0, 5.0}, 1);
  EXPECT_EQ(sample_dataset(quiet, 30, 4).x, sample_dataset(noisy, 30, 4).x);
}

TEST(Snr, Values) {
  EXPECT_DOUBLE_EQ(snr({10, 1.0, 0.2}), 5.0);
  EXPECT_DOUBLE_EQ(snr({10, 1.0, 1.0}), 1.0);
  EXPECT_DOUBLE_EQ(snr({10, 0.0, 0.5}), 0.0);
  try {
    snr({10, 1.0, 0.0});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::infinite_snr);
  }
}

TEST(Snr, ConfigForSnr) {
  const TeacherConfig c = config_for_snr(200, 5.0);
  EXPECT_DOUBLE_EQ(c.sigma_w2, 1.0);
  EXPECT_DOUBLE_EQ(c.sigma_eps2, 0.2);
  EXPECT_EQ(config_for_snr(10, INFINITY).sigma_eps2, 0.0);
  EXPECT_EQ(config_for_snr(10, 0.0).sigma_w2, 0.0);
  EXPECT_THROW(config_for_snr(10, -1.0), Error);
}

TEST(Dataset, CsvHasHeaderAndColumns) {
  const Teacher t = sample_teacher({3, 1.0, 0.1}, 1);
  std::ostringstream out;
  write_dataset_csv(out, sample_dataset(t, 2, 1));
  const std::string text = out.str();
  EXPECT_EQ(text.substr(0, text.find('\n')), "#x_1,x_2,x_3,y");
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 3);
}
