#pragma once

// MNIST label-noise experiment: IDX ingestion, a one-hidden-layer ReLU
// classifier trained by minibatch SGD on softmax cross-entropy, and a sweep
// measuring CCE between penultimate representations of paired networks.

#include "alignlab/experiments.hpp"
#include "alignlab/rng.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace alignlab {

constexpr int kClasses = 10;
constexpr std::uint32_t kIdxImageMagic = 0x00000803;
constexpr std::uint32_t kIdxLabelMagic = 0x00000801;

struct LabeledImages {
  Matrix images;                     // N x P, pixels in [0, 1]
  std::vector<std::uint8_t> labels;  // N entries in [0, 9]

  Index size() const { return images.rows(); }
  Index pixels() const { return images.cols(); }
  void validate() const;
  LabeledImages subset(std::span<const Index> rows) const;
};

/// Reads an IDX image file (magic 0x803, dims N x rows x cols) and an IDX
/// label file (magic 0x801, dim N). Pixels are divided by 255.
LabeledImages load_idx(const std::filesystem::path& images_path,
                       const std::filesystem::path& labels_path);
LabeledImages load_idx(std::istream& images, std::istream& labels);

/// Inverse of load_idx; pixels are written as round(255 x).
void write_idx(std::ostream& images, std::ostream& labels, const LabeledImages& data,
               std::uint32_t rows = 28, std::uint32_t cols = 28);

/// FNV-1a over the label bytes; pinned in tests for canonical datasets.
std::uint64_t label_checksum(const std::vector<std::uint8_t>& labels);

struct NoiseSpec {
  double p = 0.0;
  std::uint64_t seed = 0;
};

/// Each label is independently replaced with probability p by a label drawn
/// uniformly from all classes, the true class included.
std::vector<std::uint8_t> inject_label_noise(const std::vector<std::uint8_t>& labels,
                                             const NoiseSpec& spec);

struct FcnnNet {
  Matrix w1;  // k x P
  Vector b1;  // k
  Matrix w2;  // 10 x k
  Vector b2;  // 10

  Index k() const { return w1.rows(); }
  Index inputs() const { return w1.cols(); }
  Index parameter_count() const { return w1.size() + b1.size() + w2.size() + b2.size(); }
};

/// Weights and biases uniform in +-1/sqrt(fan_in).
FcnnNet init_fcnn(Index k, Index inputs, std::uint64_t seed);
FcnnNet zero_fcnn(Index k, Index inputs);

/// ReLU(W1 x + b1) for each row of `images`: N x k.
Matrix penultimate(const FcnnNet& net, const Matrix& images);
Matrix logits(const FcnnNet& net, const Matrix& images);

/// Mean softmax cross-entropy.
double cross_entropy(const FcnnNet& net, const Matrix& images, std::span<const std::uint8_t> labels);
double accuracy(const FcnnNet& net, const Matrix& images, std::span<const std::uint8_t> labels);

struct FcnnGradient {
  Matrix w1;
  Vector b1;
  Matrix w2;
  Vector b2;
};
FcnnGradient fcnn_gradient(const FcnnNet& net, const Matrix& images,
                           std::span<const std::uint8_t> labels);

struct TrainSchedule {
  double l0 = 0.1;
  Index batch_size = 128;
  int epochs = 400;
  int decay_every = 50;

  /// l0 / sqrt(1 + floor(epoch / decay_every)), constant between steps.
  double rate(int epoch) const;
  void validate() const;
};

struct SgdReport {
  double final_loss = 0.0;
  double train_accuracy = 0.0;
  int epochs = 0;
};

/// Minibatch SGD with a seeded shuffle each epoch. Throws
/// ErrorKind::training_diverged on a non-finite loss.
SgdReport train_sgd(FcnnNet& net, const LabeledImages& data, const TrainSchedule& schedule,
                    std::uint64_t seed);

struct LabelNoiseConfig {
  Index k = 64;
  std::vector<Index> n_grid;
  std::vector<double> p_list;
  int replicates = 3;
  std::uint64_t master_seed = 0;
  TrainSchedule schedule;
  Index n_cce = 2000;  // held-out test images used for CCE
  unsigned workers = 0;

  void validate(Index train_size, Index test_size) const;
};

struct LabelNoiseRow {
  Index n = 0;
  double p = 0.0;
  double gamma = 0.0;
  Summary cce_ab, cce_ba, test_err_a, test_err_b;
  int n_replicates = 0;
  int failures = 0;
  std::vector<std::string> errors;
};

struct LabelNoiseResult {
  LabelNoiseConfig config;
  std::vector<LabelNoiseRow> rows;
  std::string version;
  std::string timestamp;

  const LabelNoiseRow& at(Index n, double p) const;
};

/// n / (784 k + k + 10 k + 10) for MNIST-sized inputs.
double classifier_gamma(Index n, Index k, Index inputs = 784);

/// For each (n, p, replicate): one shared initialization, two disjoint
/// training subsets of size n, independent label noise on each, SGD on both,
/// then clean-label test error and CCE on a fixed test subsample.
LabelNoiseResult run_label_noise_sweep(const LabeledImages& train, const LabeledImages& test,
                                       const LabelNoiseConfig& config);

/// Sweep CSV columns (gamma in the alpha column, snr left empty, test error
/// in the gen_err columns) followed by p and gamma.
void emit_label_noise_csv(std::ostream& out, const LabelNoiseResult& result);

/// "smoke": n {256, 2048}, p {0, 0.2}, 2 replicates, 50 epochs.
/// "fig5-mnist": k = 64, n spanning the interpolation region, p {0, 0.2, 0.4}.
LabelNoiseConfig label_noise_preset(std::string_view name);

}  // namespace alignlab
