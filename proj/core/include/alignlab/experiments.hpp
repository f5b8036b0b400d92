#pragma once

// Ensemble sweeps over (sample size, SNR) for pairs of two-layer students
// trained on data from a shared teacher, with bidirectional CCE between their
// hidden representations and per-network generalization error.

#include "alignlab/networks.hpp"
#include "alignlab/rng.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace alignlab {

/// How linear students reach their solution. ReLU students always use GD.
enum class Solver { oracle, gd };

/// Network a / network b activations. linear_relu trains both on ONE dataset;
/// same-activation pairs train on independent datasets.
enum class ActivationPair { linear_linear, relu_relu, linear_relu };

std::string_view to_string(Solver solver);
std::string_view to_string(ActivationPair pair);
Solver parse_solver(std::string_view name);
ActivationPair parse_activation_pair(std::string_view name);

/// Sample-size axis: alpha = n/d for linear-linear sweeps, gamma = n/(d k)
/// otherwise.
bool uses_gamma_axis(ActivationPair pair);

struct GdSettings {
  double init_scale = 1e-3;
  double lr_factor = 0.5;  // see stable_learning_rate()
  long max_steps = 500000;
  double rel_tol = 1e-8;
  long patience = 100;
};

struct SweepConfig {
  std::string name = "custom";
  Index d = 200;
  Index k = 100;
  std::vector<double> axis;  // alphas or gammas, depending on the pair
  std::vector<double> snrs;
  int ensembles = 20;
  Index n_test = 10000;
  Index n_cce = 2000;
  std::uint64_t master_seed = 0;
  Solver solver = Solver::oracle;
  ActivationPair pair = ActivationPair::linear_linear;
  double sigma_w2 = 1.0;
  GdSettings gd;
  unsigned workers = 0;             // 0 = hardware concurrency
  bool identical_datasets = false;  // debug control: both nets see the same data

  void validate() const;
  Index sample_size(double axis_value) const;
};

/// One (n, snr) cell of a sweep, independent of the grid it came from.
struct CellSpec {
  Index d = 200;
  Index k = 100;
  Index n = 400;
  double snr = 1.0;
  double sigma_w2 = 1.0;
  ActivationPair pair = ActivationPair::linear_linear;
  Solver solver = Solver::oracle;
  Index n_test = 10000;
  Index n_cce = 2000;
  GdSettings gd;
  bool identical_datasets = false;
};

struct ReplicateRecord {
  double cce_ab = 0.0;
  double cce_ba = 0.0;
  double ii_ab = 0.0;
  double ii_ba = 0.0;
  double gen_err_a = 0.0;
  double gen_err_b = 0.0;
  long steps_a = 0;  // GD steps (0 for the oracle)
  long steps_b = 0;
  bool converged_a = true;
  bool converged_b = true;
};

/// Trains (or solves) one pair of students for a cell. All randomness derives
/// from `seed`. Errors carry the cell coordinates.
ReplicateRecord run_pair(const CellSpec& cell, std::uint64_t seed);

/// The two trained students of a pair and the data they saw; exposed for
/// validation code that needs more than the summary record.
struct PairState {
  Teacher teacher;
  RegressionDataset data_a;
  RegressionDataset data_b;
  TwoLayerNet net_a;
  TwoLayerNet net_b;
  Matrix x_test;
  long steps_a = 0;
  long steps_b = 0;
  bool converged_a = true;
  bool converged_b = true;
};
PairState train_pair(const CellSpec& cell, std::uint64_t seed);
ReplicateRecord evaluate_pair(const CellSpec& cell, const PairState& state, std::uint64_t seed);

struct Summary {
  double mean = 0.0;
  double std_error = 0.0;
  int count = 0;
};

/// Mean and standard error (sample std / sqrt(m)) of finite values.
Summary summarize(const std::vector<double>& values);

struct SweepRow {
  double axis = 0.0;
  double snr = 0.0;
  Index n = 0;
  Summary cce_ab, cce_ba, gen_err_a, gen_err_b;
  std::optional<double> cce_theory;
  std::optional<double> gen_err_theory;  // may be +inf at alpha = 1
  int n_replicates = 0;
  int failures = 0;
  std::vector<std::string> errors;
  std::vector<ReplicateRecord> replicates;
};

struct SweepResult {
  SweepConfig config;
  std::vector<SweepRow> rows;
  std::string version;
  std::string timestamp;

  const SweepRow& at(double axis, double snr) const;
};

/// Runs every (axis x snr x replicate) cell on a bounded worker pool. Output
/// is independent of scheduling. Cell failures are recorded per row; throws
/// ErrorKind::sweep_failed when more than 10% of cells fail.
SweepResult run_sweep(const SweepConfig& config);

extern const char* const kSweepCsvColumns;

void emit_csv(std::ostream& out, const SweepResult& result);
void emit_csv(const std::filesystem::path& path, const SweepResult& result);

/// Parses the data rows written by emit_csv (comment lines are skipped).
std::vector<SweepRow> parse_sweep_csv(std::istream& in);

/// Named figure protocols: "fig1", "fig2", "fig3".
SweepConfig sweep_preset(std::string_view name);

/// JSON object with SweepConfig keys. Unknown keys are rejected. Keys absent
/// from the object keep their value in `base`.
SweepConfig sweep_config_from_json(std::string_view json_text, SweepConfig base = {});
std::string sweep_config_to_json(const SweepConfig& config);

std::string library_version();

}  // namespace alignlab
