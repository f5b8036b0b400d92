#include "alignlab/networks.hpp"

#include "alignlab/error.hpp"
#include "alignlab/table_io.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

namespace alignlab {

namespace {

void check_input_width(const TwoLayerNet& net, const Matrix& x) {
  if (x.cols() != net.d())
    fail(ErrorKind::shape, "input has " + std::to_string(x.cols()) + " columns, net expects d = " +
                               std::to_string(net.d()));
  if (net.w2.size() != net.k())
    fail(ErrorKind::shape, "W2 has " + std::to_string(net.w2.size()) + " entries, expected k = " +
                               std::to_string(net.k()));
}

void check_dataset(const TwoLayerNet& net, const RegressionDataset& data) {
  check_input_width(net, data.x);
  if (data.y.size() != data.n()) fail(ErrorKind::shape, "dataset x and y lengths differ");
}

// Scratch buffers and one gradient evaluation shared by the trainer and
// analytic_gradient(). Returns the loss at the current weights.
class GradientWorkspace {
 public:
  double evaluate(const TwoLayerNet& net, const RegressionDataset& data, NetGradient& grad) {
    const double n = static_cast<double>(data.n());
    if (net.activation == Activation::linear) {
      // Through the end-to-end map: O(nd + kd) instead of O(ndk).
      total_ = net.w1.transpose() * net.w2;
      residual_.noalias() = data.x * total_;
      residual_ -= data.y;
      g_total_.noalias() = (2.0 / n) * (data.x.transpose() * residual_);
      grad.w1.noalias() = net.w2 * g_total_.transpose();
      grad.w2.noalias() = net.w1 * g_total_;
    } else {
      pre_.noalias() = data.x * net.w1.transpose();
      act_ = pre_.cwiseMax(0.0);
      residual_.noalias() = act_ * net.w2;
      residual_ -= data.y;
      grad.w2.noalias() = (2.0 / n) * (act_.transpose() * residual_);
      // Backprop through the rectifier; subgradient 0 at pre-activation 0.
      back_ = (residual_ * net.w2.transpose()).cwiseProduct(
          (pre_.array() > 0.0).cast<double>().matrix());
      grad.w1.noalias() = (2.0 / n) * (back_.transpose() * data.x);
    }
    return residual_.squaredNorm() / n;
  }

 private:
  Vector total_, residual_, g_total_;
  Matrix pre_, act_, back_;
};

}  // namespace

std::string_view to_string(Activation activation) {
  return activation == Activation::linear ? "linear" : "relu";
}

Activation parse_activation(std::string_view name) {
  if (name == "linear") return Activation::linear;
  if (name == "relu") return Activation::relu;
  fail(ErrorKind::invalid_input, "unknown activation '" + std::string(name) + "'");
}

TwoLayerNet init_small(Index d, Index k, Activation activation, double init_scale,
                       std::uint64_t seed) {
  if (d < 1 || k < 1) fail(ErrorKind::invalid_input, "network needs d >= 1 and k >= 1");
  if (!(init_scale > 0.0)) fail(ErrorKind::invalid_input, "init_scale must be positive");
  Rng rng = make_rng(seed);
  TwoLayerNet net;
  net.w1 = gaussian_matrix(k, d, init_scale, rng);
  net.w2 = gaussian_vector(k, init_scale, rng);
  net.activation = activation;
  return net;
}

TwoLayerNet from_total_map(const Vector& total, Index k, std::uint64_t seed) {
  if (k < 1 || total.size() < 1) fail(ErrorKind::invalid_input, "need k >= 1 and a non-empty map");
  Rng rng = make_rng(seed);
  Vector r = gaussian_vector(k, 1.0, rng);
  r /= r.norm();
  TwoLayerNet net;
  net.w1 = r * total.transpose();
  net.w2 = r;
  net.activation = Activation::linear;
  return net;
}

Matrix hidden(const TwoLayerNet& net, const Matrix& x) {
  check_input_width(net, x);
  Matrix h = x * net.w1.transpose();
  if (net.activation == Activation::relu) h = h.cwiseMax(0.0);
  return h;
}

Vector forward(const TwoLayerNet& net, const Matrix& x) {
  check_input_width(net, x);
  if (net.activation == Activation::linear) return x * net.total_map();
  return hidden(net, x) * net.w2;
}

double mse_loss(const TwoLayerNet& net, const RegressionDataset& data) {
  check_dataset(net, data);
  return (forward(net, data.x) - data.y).squaredNorm() / static_cast<double>(data.n());
}

NetGradient analytic_gradient(const TwoLayerNet& net, const RegressionDataset& data) {
  check_dataset(net, data);
  GradientWorkspace ws;
  NetGradient grad;
  ws.evaluate(net, data, grad);
  return grad;
}

void TrainConfig::validate() const {
  if (!(init_scale > 0.0) || !(learning_rate > 0.0) || max_steps <= 0 || !(rel_tol > 0.0) ||
      patience <= 0 || abs_tol < 0.0 || trace_stride < 0)
    fail(ErrorKind::config, "training configuration values must be positive (learning_rate = " +
                                std::to_string(learning_rate) + ")");
}

double loss_curvature(const Matrix& x, int iterations) {
  if (x.rows() < 1) fail(ErrorKind::invalid_input, "empty data matrix");
  Vector v = Vector::Ones(x.cols()) / std::sqrt(static_cast<double>(x.cols()));
  double lambda = 0.0;
  for (int it = 0; it < iterations; ++it) {
    Vector w = x.transpose() * (x * v);
    const double norm = w.norm();
    if (norm == 0.0) return 0.0;
    lambda = norm;
    v = w / norm;
  }
  return 2.0 * lambda / static_cast<double>(x.rows());
}

double stable_learning_rate(const RegressionDataset& data, double factor) {
  const double curvature = loss_curvature(data.x);
  if (!(curvature > 0.0)) fail(ErrorKind::degenerate_input, "data matrix is zero");
  const double rms_y = std::sqrt(data.y.squaredNorm() / static_cast<double>(data.n()));
  const double weight_scale = std::max(1.0, 2.0 * std::sqrt(static_cast<double>(data.d())) * rms_y);
  return factor / (curvature * weight_scale);
}

TrainReport train_full_batch(TwoLayerNet& net, const RegressionDataset& data,
                             const TrainConfig& cfg) {
  cfg.validate();
  check_dataset(net, data);
  const long stride = cfg.trace_stride > 0 ? cfg.trace_stride : std::max(1L, cfg.max_steps / 1000);

  GradientWorkspace ws;
  NetGradient grad{Matrix(net.k(), net.d()), Vector(net.k())};
  std::vector<double> window(static_cast<std::size_t>(cfg.patience) + 1, 0.0);
  TrainReport report;

  for (long step = 0;; ++step) {
    const double loss = ws.evaluate(net, data, grad);
    if (!std::isfinite(loss))
      fail(ErrorKind::training_diverged,
           "loss became non-finite at step " + std::to_string(step));
    if (step % stride == 0) report.loss_trace.push_back(loss);
    window[static_cast<std::size_t>(step % (cfg.patience + 1))] = loss;
    report.final_loss = loss;
    report.steps = step;

    if (loss <= cfg.abs_tol) {
      report.converged = true;
      break;
    }
    if (step >= cfg.patience) {
      const double past = window[static_cast<std::size_t>((step - cfg.patience) % (cfg.patience + 1))];
      if (std::abs(past - loss) < cfg.rel_tol * past) {
        report.converged = true;
        break;
      }
    }
    if (step >= cfg.max_steps) break;

    net.w1.noalias() -= cfg.learning_rate * grad.w1;
    net.w2.noalias() -= cfg.learning_rate * grad.w2;
  }
  if (report.loss_trace.empty() || (report.steps % stride) != 0)
    report.loss_trace.push_back(report.final_loss);
  return report;
}

double empirical_gen_error(const TwoLayerNet& net, const Teacher& teacher, const Matrix& x_test) {
  check_input_width(net, x_test);
  if (teacher.w_star.size() != x_test.cols())
    fail(ErrorKind::shape, "teacher dimension does not match test inputs");
  if (x_test.rows() < 1) fail(ErrorKind::invalid_input, "empty test set");
  const Vector target = x_test * teacher.w_star;
  return (target - forward(net, x_test)).squaredNorm() / static_cast<double>(x_test.rows()) +
         teacher.config.sigma_eps2;
}

void save_checkpoint(std::ostream& out, const TwoLayerNet& net) {
  std::ostringstream header;
  header << "twolayer d=" << net.d() << " k=" << net.k() << " activation=" << to_string(net.activation);
  out << '#' << header.str() << '\n';
  write_matrix_csv(out, net.w1);
  write_matrix_csv(out, Matrix(net.w2.transpose()));
}

TwoLayerNet load_checkpoint(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line.rfind("#twolayer", 0) != 0)
    fail(ErrorKind::format, "checkpoint must start with '#twolayer'");
  long d = -1, k = -1;
  std::string act;
  std::istringstream fields(line.substr(9));
  std::string token;
  while (fields >> token) {
    const auto eq = token.find('=');
    if (eq == std::string::npos) fail(ErrorKind::format, "bad checkpoint header field '" + token + "'");
    const std::string key = token.substr(0, eq), value = token.substr(eq + 1);
    if (key == "d") d = std::stol(value);
    else if (key == "k") k = std::stol(value);
    else if (key == "activation") act = value;
  }
  if (d < 1 || k < 1 || act.empty()) fail(ErrorKind::format, "checkpoint header missing d, k or activation");

  TwoLayerNet net;
  net.activation = parse_activation(act);
  net.w1.resize(k, d);
  std::string body((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  std::istringstream body_in(body);
  // Rows differ in width (d for W1, k for W2), so parse line by line.
  std::string row;
  long r = 0;
  while (std::getline(body_in, row)) {
    if (row.empty()) continue;
    std::istringstream one(row);
    Matrix m = read_matrix_csv(one, "checkpoint");
    if (r < k) {
      if (m.cols() != d) fail(ErrorKind::format, "W1 row has wrong width");
      net.w1.row(r) = m.row(0);
    } else if (r == k) {
      if (m.cols() != k) fail(ErrorKind::format, "W2 row has wrong width");
      net.w2 = m.row(0).transpose();
    } else {
      fail(ErrorKind::format, "trailing rows in checkpoint");
    }
    ++r;
  }
  if (r != k + 1) fail(ErrorKind::format, "checkpoint truncated");
  return net;
}

}  // namespace alignlab
