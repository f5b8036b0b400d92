#pragma once

// Noisy linear teacher y = w* . x + eps with x ~ N(0, I_d / d),
// w*_j ~ N(0, sigma_w2) and eps ~ N(0, sigma_eps2).

#include "alignlab/rng.hpp"

#include <cstdint>
#include <iosfwd>

namespace alignlab {

struct TeacherConfig {
  Index d = 200;
  double sigma_w2 = 1.0;
  double sigma_eps2 = 0.2;

  void validate() const;
};

struct Teacher {
  Vector w_star;
  TeacherConfig config;
};

struct RegressionDataset {
  Matrix x;  // n x d
  Vector y;  // n

  Index n() const { return x.rows(); }
  Index d() const { return x.cols(); }
};

Teacher sample_teacher(const TeacherConfig& config, std::uint64_t seed);

/// n x d inputs with i.i.d. N(0, 1/d) entries.
Matrix sample_inputs(Index n, Index d, std::uint64_t seed);

RegressionDataset sample_dataset(const Teacher& teacher, Index n, std::uint64_t seed);

/// sigma_w2 / sigma_eps2. Throws ErrorKind::infinite_snr when sigma_eps2 == 0.
double snr(const TeacherConfig& config);

/// Teacher config for a given SNR at fixed sigma_w2; snr may be +inf.
TeacherConfig config_for_snr(Index d, double snr, double sigma_w2 = 1.0);

/// CSV dump with header "#x_1,...,x_d,y".
void write_dataset_csv(std::ostream& out, const RegressionDataset& data);

}  // namespace alignlab
