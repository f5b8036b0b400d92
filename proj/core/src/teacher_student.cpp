#include "alignlab/teacher_student.hpp"

#include "alignlab/error.hpp"
#include "alignlab/table_io.hpp"

#include <cmath>
#include <limits>
#include <ostream>
#include <string>

namespace alignlab {

void TeacherConfig::validate() const {
  if (d < 1) fail(ErrorKind::invalid_input, "teacher dimension must be >= 1");
  if (!(sigma_w2 >= 0.0) || !(sigma_eps2 >= 0.0) || !std::isfinite(sigma_w2) ||
      !std::isfinite(sigma_eps2))
    fail(ErrorKind::invalid_input, "teacher variances must be finite and non-negative");
  if (sigma_w2 == 0.0 && sigma_eps2 == 0.0)
    fail(ErrorKind::invalid_input, "sigma_w2 and sigma_eps2 cannot both be zero");
}

Teacher sample_teacher(const TeacherConfig& config, std::uint64_t seed) {
  config.validate();
  Rng rng = make_rng(seed);
  return Teacher{gaussian_vector(config.d, std::sqrt(config.sigma_w2), rng), config};
}

Matrix sample_inputs(Index n, Index d, std::uint64_t seed) {
  if (n < 1 || d < 1) fail(ErrorKind::invalid_input, "input matrix needs n >= 1 and d >= 1");
  Rng rng = make_rng(seed);
  return gaussian_matrix(n, d, 1.0 / std::sqrt(static_cast<double>(d)), rng);
}

RegressionDataset sample_dataset(const Teacher& teacher, Index n, std::uint64_t seed) {
  if (n < 1) fail(ErrorKind::invalid_input, "dataset size must be >= 1, got " + std::to_string(n));
  const Index d = teacher.config.d;
  RegressionDataset data;
  data.x = sample_inputs(n, d, seed);
  // Noise from a separate stream so x does not depend on sigma_eps2.
  Rng noise_rng = make_rng(derive_seed(seed, {0x6e6f697365ULL}));
  data.y = data.x * teacher.w_star;
  if (teacher.config.sigma_eps2 > 0.0)
    data.y += gaussian_vector(n, std::sqrt(teacher.config.sigma_eps2), noise_rng);
  return data;
}

double snr(const TeacherConfig& config) {
  if (config.sigma_eps2 == 0.0)
    fail(ErrorKind::infinite_snr, "sigma_eps2 = 0: signal-to-noise ratio is infinite");
  return config.sigma_w2 / config.sigma_eps2;
}

TeacherConfig config_for_snr(Index d, double snr_value, double sigma_w2) {
  if (!(snr_value >= 0.0)) fail(ErrorKind::invalid_input, "SNR must be non-negative");
  TeacherConfig cfg;
  cfg.d = d;
  if (std::isinf(snr_value)) {
    cfg.sigma_w2 = sigma_w2;
    cfg.sigma_eps2 = 0.0;
  } else if (snr_value == 0.0) {
    // No signal: keep the label scale at sigma_w2.
    cfg.sigma_w2 = 0.0;
    cfg.sigma_eps2 = sigma_w2;
  } else {
    cfg.sigma_w2 = sigma_w2;
    cfg.sigma_eps2 = sigma_w2 / snr_value;
  }
  cfg.validate();
  return cfg;
}

void write_dataset_csv(std::ostream& out, const RegressionDataset& data) {
  out << '#';
  for (Index j = 0; j < data.d(); ++j) out << "x_" << (j + 1) << ',';
  out << "y\n";
  Matrix joined(data.n(), data.d() + 1);
  joined << data.x, data.y;
  write_matrix_csv(out, joined);
}

}  // namespace alignlab
