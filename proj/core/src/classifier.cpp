#include "alignlab/classifier.hpp"

#include "alignlab/error.hpp"
#include "alignlab/metrics.hpp"
#include "alignlab/parallel.hpp"
#include "alignlab/table_io.hpp"

#include <algorithm>
#include <cmath>
#include <ctime>
#include <numeric>
#include <ostream>
#include <random>

namespace alignlab {

namespace {

Matrix gather_rows(const Matrix& m, std::span<const Index> rows) {
  Matrix out(static_cast<Index>(rows.size()), m.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Index>(i)) = m.row(rows[i]);
  return out;
}

void check_inputs(const FcnnNet& net, const Matrix& images) {
  if (images.cols() != net.inputs())
    fail(ErrorKind::shape, "images have " + std::to_string(images.cols()) +
                               " pixels, network expects " + std::to_string(net.inputs()));
}

void check_labels(const Matrix& images, std::span<const std::uint8_t> labels) {
  if (static_cast<Index>(labels.size()) != images.rows())
    fail(ErrorKind::shape, "label count does not match image count");
}

// Row-wise softmax in place, shifted by the row maximum.
void softmax_rows(Matrix& z) {
  for (Index i = 0; i < z.rows(); ++i) {
    const double m = z.row(i).maxCoeff();
    z.row(i) = (z.row(i).array() - m).exp();
    z.row(i) /= z.row(i).sum();
  }
}

// Forward and backward pass on one batch; returns the mean loss.
class FcnnWorkspace {
 public:
  double evaluate(const FcnnNet& net, const Matrix& x, std::span<const std::uint8_t> y,
                  FcnnGradient& g) {
    const auto b = static_cast<double>(x.rows());
    pre_.noalias() = x * net.w1.transpose();
    pre_.rowwise() += net.b1.transpose();
    h_ = pre_.cwiseMax(0.0);
    z_.noalias() = h_ * net.w2.transpose();
    z_.rowwise() += net.b2.transpose();
    double loss = 0.0;
    for (Index i = 0; i < z_.rows(); ++i) {
      const double m = z_.row(i).maxCoeff();
      const double lse = m + std::log((z_.row(i).array() - m).exp().sum());
      loss += lse - z_(i, y[static_cast<std::size_t>(i)]);
    }
    softmax_rows(z_);
    for (Index i = 0; i < z_.rows(); ++i) z_(i, y[static_cast<std::size_t>(i)]) -= 1.0;
    z_ /= b;
    g.w2.noalias() = z_.transpose() * h_;
    g.b2 = z_.colwise().sum().transpose();
    back_.noalias() = z_ * net.w2;
    back_.array() *= (pre_.array() > 0.0).cast<double>();
    g.w1.noalias() = back_.transpose() * x;
    g.b1 = back_.colwise().sum().transpose();
    return loss / b;
  }

 private:
  Matrix pre_, h_, z_, back_;
};

std::string utc_now() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

void LabeledImages::validate() const {
  if (static_cast<Index>(labels.size()) != images.rows())
    fail(ErrorKind::shape, "label count does not match image count");
  for (std::uint8_t l : labels)
    if (l >= kClasses) fail(ErrorKind::invalid_input, "label " + std::to_string(l) + " outside [0, 9]");
  if (images.size() > 0 && (images.minCoeff() < 0.0 || images.maxCoeff() > 1.0))
    fail(ErrorKind::invalid_input, "pixels must lie in [0, 1]");
}

LabeledImages LabeledImages::subset(std::span<const Index> rows) const {
  LabeledImages out;
  out.images = gather_rows(images, rows);
  out.labels.reserve(rows.size());
  for (Index r : rows) {
    if (r < 0 || r >= size()) fail(ErrorKind::invalid_input, "subset index out of range");
    out.labels.push_back(labels[static_cast<std::size_t>(r)]);
  }
  return out;
}

std::vector<std::uint8_t> inject_label_noise(const std::vector<std::uint8_t>& labels,
                                             const NoiseSpec& spec) {
  if (!(spec.p >= 0.0 && spec.p <= 1.0))
    fail(ErrorKind::invalid_input, "label-noise rate must lie in [0, 1]");
  Rng rng = make_rng(spec.seed);
  std::bernoulli_distribution flip(spec.p);
  std::uniform_int_distribution<int> label(0, kClasses - 1);
  std::vector<std::uint8_t> out(labels);
  for (auto& l : out)
    if (flip(rng)) l = static_cast<std::uint8_t>(label(rng));
  return out;
}

FcnnNet init_fcnn(Index k, Index inputs, std::uint64_t seed) {
  if (k < 1 || inputs < 1) fail(ErrorKind::invalid_input, "network needs k >= 1 and inputs >= 1");
  Rng rng = make_rng(seed);
  auto uniform = [&](Index rows, Index cols, double bound) {
    std::uniform_real_distribution<double> u(-bound, bound);
    Matrix m(rows, cols);
    for (Index i = 0; i < rows; ++i)
      for (Index j = 0; j < cols; ++j) m(i, j) = u(rng);
    return m;
  };
  const double b1 = 1.0 / std::sqrt(static_cast<double>(inputs));
  const double b2 = 1.0 / std::sqrt(static_cast<double>(k));
  FcnnNet net;
  net.w1 = uniform(k, inputs, b1);
  net.b1 = uniform(k, 1, b1);
  net.w2 = uniform(kClasses, k, b2);
  net.b2 = uniform(kClasses, 1, b2);
  return net;
}

FcnnNet zero_fcnn(Index k, Index inputs) {
  return {Matrix::Zero(k, inputs), Vector::Zero(k), Matrix::Zero(kClasses, k), Vector::Zero(kClasses)};
}

Matrix penultimate(const FcnnNet& net, const Matrix& images) {
  check_inputs(net, images);
  Matrix pre = images * net.w1.transpose();
  pre.rowwise() += net.b1.transpose();
  return pre.cwiseMax(0.0);
}

Matrix logits(const FcnnNet& net, const Matrix& images) {
  Matrix z = penultimate(net, images) * net.w2.transpose();
  z.rowwise() += net.b2.transpose();
  return z;
}

double cross_entropy(const FcnnNet& net, const Matrix& images, std::span<const std::uint8_t> labels) {
  check_labels(images, labels);
  const Matrix z = logits(net, images);
  double loss = 0.0;
  for (Index i = 0; i < z.rows(); ++i) {
    const double m = z.row(i).maxCoeff();
    loss += m + std::log((z.row(i).array() - m).exp().sum()) - z(i, labels[static_cast<std::size_t>(i)]);
  }
  return loss / static_cast<double>(z.rows());
}

double accuracy(const FcnnNet& net, const Matrix& images, std::span<const std::uint8_t> labels) {
  check_labels(images, labels);
  if (images.rows() == 0) fail(ErrorKind::invalid_input, "no images");
  const Matrix z = logits(net, images);
  Index correct = 0;
  for (Index i = 0; i < z.rows(); ++i) {
    Index best = 0;
    z.row(i).maxCoeff(&best);
    if (best == labels[static_cast<std::size_t>(i)]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(z.rows());
}

FcnnGradient fcnn_gradient(const FcnnNet& net, const Matrix& images,
                           std::span<const std::uint8_t> labels) {
  check_inputs(net, images);
  check_labels(images, labels);
  FcnnWorkspace ws;
  FcnnGradient g;
  ws.evaluate(net, images, labels, g);
  return g;
}

double TrainSchedule::rate(int epoch) const {
  return l0 / std::sqrt(1.0 + static_cast<double>(epoch / decay_every));
}

void TrainSchedule::validate() const {
  if (!(l0 > 0.0) || batch_size < 1 || epochs < 1 || decay_every < 1)
    fail(ErrorKind::config, "training schedule values must be positive");
}

SgdReport train_sgd(FcnnNet& net, const LabeledImages& data, const TrainSchedule& schedule,
                    std::uint64_t seed) {
  schedule.validate();
  check_inputs(net, data.images);
  check_labels(data.images, data.labels);
  const Index n = data.size();
  if (n < 1) fail(ErrorKind::invalid_input, "empty training set");

  Rng rng = make_rng(seed);
  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  FcnnWorkspace ws;
  FcnnGradient g;
  Matrix batch;
  std::vector<std::uint8_t> batch_labels;
  SgdReport report;
  for (int epoch = 0; epoch < schedule.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    const double lr = schedule.rate(epoch);
    for (Index start = 0; start < n; start += schedule.batch_size) {
      const Index size = std::min(schedule.batch_size, n - start);
      batch.resize(size, data.pixels());
      batch_labels.resize(static_cast<std::size_t>(size));
      for (Index i = 0; i < size; ++i) {
        const Index src = order[static_cast<std::size_t>(start + i)];
        batch.row(i) = data.images.row(src);
        batch_labels[static_cast<std::size_t>(i)] = data.labels[static_cast<std::size_t>(src)];
      }
      const double loss = ws.evaluate(net, batch, batch_labels, g);
      if (!std::isfinite(loss))
        fail(ErrorKind::training_diverged, "loss became non-finite in epoch " + std::to_string(epoch));
      net.w1.noalias() -= lr * g.w1;
      net.b1.noalias() -= lr * g.b1;
      net.w2.noalias() -= lr * g.w2;
      net.b2.noalias() -= lr * g.b2;
    }
    report.epochs = epoch + 1;
  }
  report.final_loss = cross_entropy(net, data.images, data.labels);
  report.train_accuracy = accuracy(net, data.images, data.labels);
  return report;
}

void LabelNoiseConfig::validate(Index train_size, Index test_size) const {
  if (k < 1) fail(ErrorKind::config, "k must be >= 1");
  if (n_grid.empty() || p_list.empty()) fail(ErrorKind::config, "n grid and p list must be non-empty");
  if (replicates < 2) fail(ErrorKind::config, "replicates must be >= 2, got " + std::to_string(replicates));
  for (Index n : n_grid)
    if (n < 1 || 2 * n > train_size)
      fail(ErrorKind::config, "n = " + std::to_string(n) + " needs 2n <= " + std::to_string(train_size));
  for (double p : p_list)
    if (!(p >= 0.0 && p <= 1.0)) fail(ErrorKind::config, "label-noise rates must lie in [0, 1]");
  if (n_cce < 9 || n_cce > test_size)
    fail(ErrorKind::config, "n_cce must lie in [9, test size " + std::to_string(test_size) + "]");
  schedule.validate();
}

double classifier_gamma(Index n, Index k, Index inputs) {
  return static_cast<double>(n) / static_cast<double>(inputs * k + k + kClasses * k + kClasses);
}

const LabelNoiseRow& LabelNoiseResult::at(Index n, double p) const {
  for (const auto& row : rows)
    if (row.n == n && row.p == p) return row;
  fail(ErrorKind::invalid_input, "no label-noise row at n = " + std::to_string(n));
}

LabelNoiseResult run_label_noise_sweep(const LabeledImages& train, const LabeledImages& test,
                                       const LabelNoiseConfig& config) {
  train.validate();
  test.validate();
  config.validate(train.size(), test.size());
  if (train.pixels() != test.pixels()) fail(ErrorKind::shape, "train and test images differ in size");

  Rng cce_rng = make_rng(derive_seed(config.master_seed, Stream::subsample));
  const auto cce_rows = sample_without_replacement(test.size(), config.n_cce, cce_rng);
  const Matrix cce_images = gather_rows(test.images, cce_rows);

  const std::size_t n_n = config.n_grid.size();
  const std::size_t n_p = config.p_list.size();
  const auto n_rep = static_cast<std::size_t>(config.replicates);
  const std::size_t total = n_n * n_p * n_rep;

  struct Outcome {
    bool ok = false;
    double cce_ab = 0, cce_ba = 0, err_a = 0, err_b = 0;
    std::string error;
  };
  std::vector<Outcome> outcomes(total);

  parallel_for(total, config.workers, [&](std::size_t idx) {
    const std::size_t rep = idx % n_rep;
    const std::size_t pi = (idx / n_rep) % n_p;
    const std::size_t ni = idx / (n_rep * n_p);
    const Index n = config.n_grid[ni];
    const std::uint64_t seed = derive_seed(config.master_seed, {ni, pi, rep});
    Outcome& o = outcomes[idx];
    try {
      Rng split = make_rng(derive_seed(seed, Stream::split));
      auto rows = sample_without_replacement(train.size(), 2 * n, split);
      std::shuffle(rows.begin(), rows.end(), split);
      const std::span<const Index> all(rows);
      LabeledImages data_a = train.subset(all.first(static_cast<std::size_t>(n)));
      LabeledImages data_b = train.subset(all.last(static_cast<std::size_t>(n)));
      data_a.labels = inject_label_noise(data_a.labels, {config.p_list[pi], derive_seed(seed, Stream::noise_a)});
      data_b.labels = inject_label_noise(data_b.labels, {config.p_list[pi], derive_seed(seed, Stream::noise_b)});

      const FcnnNet init = init_fcnn(config.k, train.pixels(), derive_seed(seed, Stream::init_a));
      FcnnNet net_a = init;
      FcnnNet net_b = init;
      train_sgd(net_a, data_a, config.schedule, derive_seed(seed, Stream::shuffle_a));
      train_sgd(net_b, data_b, config.schedule, derive_seed(seed, Stream::shuffle_b));

      o.err_a = 1.0 - accuracy(net_a, test.images, test.labels);
      o.err_b = 1.0 - accuracy(net_b, test.images, test.labels);
      const AlignmentScore s =
          cce_between(PointSet(penultimate(net_a, cce_images)), PointSet(penultimate(net_b, cce_images)));
      o.cce_ab = s.cce_ab;
      o.cce_ba = s.cce_ba;
      o.ok = true;
    } catch (const std::exception& e) {
      o.error = "n=" + std::to_string(n) + " p=" + format_double(config.p_list[pi]) + " replicate " +
                std::to_string(rep) + ": " + e.what();
    }
  });

  LabelNoiseResult result;
  result.config = config;
  result.version = library_version();
  result.timestamp = utc_now();
  std::size_t failures = 0;
  for (std::size_t ni = 0; ni < n_n; ++ni) {
    for (std::size_t pi = 0; pi < n_p; ++pi) {
      LabelNoiseRow row;
      row.n = config.n_grid[ni];
      row.p = config.p_list[pi];
      row.gamma = classifier_gamma(row.n, config.k, train.pixels());
      std::vector<double> cab, cba, ea, eb;
      for (std::size_t rep = 0; rep < n_rep; ++rep) {
        const Outcome& o = outcomes[(ni * n_p + pi) * n_rep + rep];
        if (!o.ok) {
          ++row.failures;
          row.errors.push_back(o.error);
          continue;
        }
        cab.push_back(o.cce_ab);
        cba.push_back(o.cce_ba);
        ea.push_back(o.err_a);
        eb.push_back(o.err_b);
      }
      row.n_replicates = static_cast<int>(cab.size());
      row.cce_ab = summarize(cab);
      row.cce_ba = summarize(cba);
      row.test_err_a = summarize(ea);
      row.test_err_b = summarize(eb);
      failures += static_cast<std::size_t>(row.failures);
      result.rows.push_back(std::move(row));
    }
  }
  if (failures * 10 > total)
    fail(ErrorKind::sweep_failed, std::to_string(failures) + " of " + std::to_string(total) +
                                      " label-noise cells failed (limit 10%)");
  return result;
}

void emit_label_noise_csv(std::ostream& out, const LabelNoiseResult& result) {
  const LabelNoiseConfig& c = result.config;
  out << "# alignlab label-noise sweep\n";
  out << "# version: " << (result.version.empty() ? library_version() : result.version) << '\n';
  out << "# timestamp: " << result.timestamp << '\n';
  out << "# axis: gamma = n / (784 k + k + 10 k + 10); gen_err columns hold clean test error\n";
  out << "# config: k=" << c.k << " replicates=" << c.replicates << " master_seed=" << c.master_seed
      << " l0=" << format_double(c.schedule.l0) << " batch_size=" << c.schedule.batch_size
      << " epochs=" << c.schedule.epochs << " decay_every=" << c.schedule.decay_every
      << " n_cce=" << c.n_cce << '\n';
  for (const auto& row : result.rows)
    for (const auto& e : row.errors) out << "# failure " << e << '\n';
  out << kSweepCsvColumns << ",p,gamma\n";
  for (const auto& row : result.rows) {
    out << format_double(row.gamma) << ",," << row.n << ',' << format_double(row.cce_ab.mean) << ','
        << format_double(row.cce_ab.std_error) << ',' << format_double(row.cce_ba.mean) << ','
        << format_double(row.cce_ba.std_error) << ',' << format_double(row.test_err_a.mean) << ','
        << format_double(row.test_err_a.std_error) << ',' << format_double(row.test_err_b.mean) << ','
        << format_double(row.test_err_b.std_error) << ",,," << row.n_replicates << ','
        << row.failures << ',' << format_double(row.p) << ',' << format_double(row.gamma) << '\n';
  }
}

LabelNoiseConfig label_noise_preset(std::string_view name) {
  LabelNoiseConfig c;
  if (name == "smoke") {
    c.k = 64;
    c.n_grid = {256, 2048};
    c.p_list = {0.0, 0.2};
    c.replicates = 2;
    c.schedule.epochs = 50;
  } else if (name == "fig5-mnist") {
    c.k = 64;
    c.n_grid = {1000, 2500, 5000, 10000, 20000, 30000};
    c.p_list = {0.0, 0.2, 0.4};
    c.replicates = 3;
  } else {
    fail(ErrorKind::config, "unknown label-noise preset '" + std::string(name) +
                                "' (expected smoke or fig5-mnist)");
  }
  return c;
}

}  // namespace alignlab
