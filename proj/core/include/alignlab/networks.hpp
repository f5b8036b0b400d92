#pragma once

#include "alignlab/rng.hpp"
#include "alignlab/teacher_student.hpp"

#include <cstdint>
#include <iosfwd>
#include <string_view>
#include <vector>

namespace alignlab {

enum class Activation { linear, relu };

std::string_view to_string(Activation activation);
Activation parse_activation(std::string_view name);

/// y_hat = w2 . phi(w1 x), w1: k x d, w2: k (a 1 x k row stored as a vector).
struct TwoLayerNet {
  Matrix w1;
  Vector w2;
  Activation activation = Activation::linear;

  Index d() const { return w1.cols(); }
  Index k() const { return w1.rows(); }

  /// W2 W1 as a d-vector. Only meaningful for linear nets.
  Vector total_map() const { return w1.transpose() * w2; }
};

/// Entries of W1 and W2 i.i.d. N(0, init_scale^2).
TwoLayerNet init_small(Index d, Index k, Activation activation, double init_scale,
                       std::uint64_t seed);

/// Rank-one linear net W1 = r v^T, W2 = r^T with a seeded random unit r, so
/// that W2 W1 = v. Used to embed an exact solution in k hidden units.
TwoLayerNet from_total_map(const Vector& total, Index k, std::uint64_t seed);

Vector forward(const TwoLayerNet& net, const Matrix& x);

/// Hidden representation: n x k matrix with rows phi(W1 x_i).
Matrix hidden(const TwoLayerNet& net, const Matrix& x);

/// L = (1/n) ||y_hat - y||^2.
double mse_loss(const TwoLayerNet& net, const RegressionDataset& data);

struct NetGradient {
  Matrix w1;
  Vector w2;
};

/// dL/dW1 and dL/dW2. The ReLU subgradient at 0 is taken as 0.
NetGradient analytic_gradient(const TwoLayerNet& net, const RegressionDataset& data);

struct TrainConfig {
  double init_scale = 1e-3;
  double learning_rate = 0.0;  // must be set; see stable_learning_rate()
  long max_steps = 500000;
  double rel_tol = 1e-8;       // stop when |L(t-patience) - L(t)| / L(t-patience) < rel_tol
  long patience = 100;
  double abs_tol = 1e-14;      // or when L(t) <= abs_tol (exact interpolation)
  long trace_stride = 0;       // loss_trace decimation; 0 picks max_steps / 1000

  void validate() const;
};

struct TrainReport {
  double final_loss = 0.0;
  long steps = 0;
  bool converged = false;
  std::vector<double> loss_trace;
};

/// Largest eigenvalue of (2/n) X^T X, i.e. the curvature of the loss with
/// respect to the end-to-end map, by power iteration.
double loss_curvature(const Matrix& x, int iterations = 100);

/// Step size factor / (curvature * max(1, 2 sqrt(d) rms(y))). The second
/// factor estimates ||W1||^2 + ||W2||^2 at a balanced minimum, which scales
/// the curvature seen by the factored parameters.
double stable_learning_rate(const RegressionDataset& data, double factor);

/// Full-batch gradient descent on the MSE loss; mutates `net`.
/// Throws ErrorKind::training_diverged if the loss becomes non-finite.
TrainReport train_full_batch(TwoLayerNet& net, const RegressionDataset& data,
                             const TrainConfig& cfg);

/// (1/n_test) sum (w* . x_i - y_hat_i)^2 + sigma_eps2: noiseless test targets
/// with the label noise added analytically.
double empirical_gen_error(const TwoLayerNet& net, const Teacher& teacher, const Matrix& x_test);

/// Text checkpoint: "#twolayer d=<d> k=<k> activation=<linear|relu>", then k
/// rows of W1 (d values each), then one row of W2 (k values).
void save_checkpoint(std::ostream& out, const TwoLayerNet& net);
TwoLayerNet load_checkpoint(std::istream& in);

}  // namespace alignlab
