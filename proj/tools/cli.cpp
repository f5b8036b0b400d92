#include "cli.hpp"

#include "alignlab/classifier.hpp"
#include "alignlab/error.hpp"
#include "alignlab/experiments.hpp"
#include "alignlab/metrics.hpp"
#include "alignlab/table_io.hpp"
#include "alignlab/teacher_student.hpp"
#include "alignlab/theory.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <functional>
#include <optional>
#include <ostream>
#include <sstream>

namespace alignlab::cli {

namespace {

constexpr const char* kMnistEnv = "ALIGNLAB_MNIST_DIR";

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::config:
    case ErrorKind::invalid_input:
    case ErrorKind::shape:
      return usage;
    case ErrorKind::io:
    case ErrorKind::format:
      return io;
    default:
      return numerical;
  }
}

// Runs `body` with a stream bound to --out ("-" means `out`).
void with_output(const std::string& path, std::ostream& out,
                 const std::function<void(std::ostream&)>& body) {
  if (path == "-") {
    body(out);
    return;
  }
  std::ofstream file(path);
  if (!file) fail(ErrorKind::io, "cannot open '" + path + "' for writing");
  body(file);
  file.flush();
  if (!file) fail(ErrorKind::io, "write to '" + path + "' failed");
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::io, "cannot open config file '" + path + "'");
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

struct TheoryArgs {
  std::vector<double> alphas;
  std::vector<double> snrs;
  double sigma_w2 = 1.0;
  std::string out = "-";
};

struct SweepArgs {
  std::string preset;
  std::string config_path;
  std::vector<double> alphas, gammas, snrs;
  std::optional<int> ensembles;
  std::optional<Index> d, k, n_test, n_cce;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> solver, pair;
  std::optional<unsigned> workers;
  std::optional<long> max_steps;
  std::optional<double> lr_factor, sigma_w2;
  bool identical = false;
  std::string out = "-";
};

struct CceArgs {
  std::string file_a, file_b;
  std::optional<Index> subsample;
  std::uint64_t seed = 0;
};

struct MnistArgs {
  std::string preset = "fig5-mnist";
  std::string mnist_dir;
  std::optional<Index> k, n_cce;
  std::vector<Index> n_grid;
  std::vector<double> p_list;
  std::optional<int> replicates, epochs;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> workers;
  std::string out = "-";
};

struct DatasetArgs {
  Index d = 200;
  Index n = 400;
  double snr = 5.0;
  double sigma_w2 = 1.0;
  std::uint64_t seed = 0;
  std::string out = "-";
};

void cmd_theory(const TheoryArgs& a, std::ostream& out) {
  if (a.alphas.empty() || a.snrs.empty()) fail(ErrorKind::config, "--alphas and --snr need values");
  with_output(a.out, out, [&](std::ostream& o) {
    o << "alpha,snr,rho_star,cce,gen_error\n";
    for (double snr : a.snrs)
      for (double alpha : a.alphas) {
        const TheoryPoint p = theory_point(alpha, snr, a.sigma_w2);
        o << format_double(alpha) << ',' << format_double(snr) << ',' << format_double(p.rho_star)
          << ',' << format_double(p.cce) << ',' << format_double(p.gen_error) << '\n';
      }
  });
}

SweepConfig resolve_sweep(const SweepArgs& a) {
  SweepConfig c;
  if (!a.preset.empty()) c = sweep_preset(a.preset);
  if (!a.config_path.empty()) c = sweep_config_from_json(read_text_file(a.config_path), c);
  if (a.pair) c.pair = parse_activation_pair(*a.pair);
  if (a.solver) c.solver = parse_solver(*a.solver);
  if (!a.alphas.empty()) c.axis = a.alphas;
  if (!a.gammas.empty()) c.axis = a.gammas;
  if (!a.snrs.empty()) c.snrs = a.snrs;
  if (a.ensembles) c.ensembles = *a.ensembles;
  if (a.d) c.d = *a.d;
  if (a.k) c.k = *a.k;
  if (a.n_test) c.n_test = *a.n_test;
  if (a.n_cce) c.n_cce = *a.n_cce;
  if (a.seed) c.master_seed = *a.seed;
  if (a.workers) c.workers = *a.workers;
  if (a.max_steps) c.gd.max_steps = *a.max_steps;
  if (a.lr_factor) c.gd.lr_factor = *a.lr_factor;
  if (a.sigma_w2) c.sigma_w2 = *a.sigma_w2;
  if (a.identical) c.identical_datasets = true;
  c.validate();
  return c;
}

void cmd_sweep(const SweepArgs& a, std::ostream& out, std::ostream& err) {
  const SweepConfig c = resolve_sweep(a);
  err << "resolved config: " << sweep_config_to_json(c) << '\n';
  const SweepResult r = run_sweep(c);
  with_output(a.out, out, [&](std::ostream& o) { emit_csv(o, r); });
}

void cmd_cce(const CceArgs& a, std::ostream& out) {
  const Matrix ma = read_matrix_csv(a.file_a);
  const Matrix mb = read_matrix_csv(a.file_b);
  if (ma.rows() != mb.rows())
    fail(ErrorKind::shape, "row counts differ: '" + a.file_a + "' has " + std::to_string(ma.rows()) +
                               " rows, '" + a.file_b + "' has " + std::to_string(mb.rows()));
  const AlignmentScore s = cce_between(PointSet(ma), PointSet(mb), a.subsample, a.seed);
  out << "cce_ab=" << format_double(s.cce_ab) << '\n'
      << "cce_ba=" << format_double(s.cce_ba) << '\n'
      << "ii_ab=" << format_double(s.ii_ab) << '\n'
      << "ii_ba=" << format_double(s.ii_ba) << '\n'
      << "N=" << s.n_points << '\n'
      << "M=" << s.n_bins << '\n';
}

void cmd_mnist(const MnistArgs& a, std::ostream& out, std::ostream& err) {
  LabelNoiseConfig c = label_noise_preset(a.preset);
  if (a.k) c.k = *a.k;
  if (a.n_cce) c.n_cce = *a.n_cce;
  if (!a.n_grid.empty()) c.n_grid = a.n_grid;
  if (!a.p_list.empty()) c.p_list = a.p_list;
  if (a.replicates) c.replicates = *a.replicates;
  if (a.epochs) c.schedule.epochs = *a.epochs;
  if (a.seed) c.master_seed = *a.seed;
  if (a.workers) c.workers = *a.workers;

  std::string dir = a.mnist_dir;
  if (dir.empty())
    if (const char* env = std::getenv(kMnistEnv)) dir = env;
  if (dir.empty())
    fail(ErrorKind::config, std::string("no MNIST directory: pass --mnist-dir or set ") + kMnistEnv);
  const std::filesystem::path root(dir);
  if (!std::filesystem::is_directory(root))
    fail(ErrorKind::io, "MNIST directory '" + dir + "' does not exist (from --mnist-dir or " + kMnistEnv + ")");
  const LabeledImages train = load_idx(root / "train-images-idx3-ubyte", root / "train-labels-idx1-ubyte");
  const LabeledImages test = load_idx(root / "t10k-images-idx3-ubyte", root / "t10k-labels-idx1-ubyte");
  c.validate(train.size(), test.size());
  err << "resolved config: preset=" << a.preset << " k=" << c.k << " replicates=" << c.replicates
      << " epochs=" << c.schedule.epochs << " seed=" << c.master_seed << '\n';
  const LabelNoiseResult r = run_label_noise_sweep(train, test, c);
  with_output(a.out, out, [&](std::ostream& o) { emit_label_noise_csv(o, r); });
}

void cmd_dataset(const DatasetArgs& a, std::ostream& out) {
  const Teacher t = sample_teacher(config_for_snr(a.d, a.snr, a.sigma_w2), derive_seed(a.seed, Stream::teacher));
  const RegressionDataset data = sample_dataset(t, a.n, derive_seed(a.seed, Stream::dataset_a));
  with_output(a.out, out, [&](std::ostream& o) { write_dataset_csv(o, data); });
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Representational alignment laboratory", "alignlab"};
  app.require_subcommand(1, 1);
  app.set_version_flag("--version", library_version());

  TheoryArgs theory;
  auto* t = app.add_subcommand("theory", "Closed-form correlation, CCE and generalization error");
  t->add_option("--alphas", theory.alphas, "Comma-separated n/d values")->delimiter(',')->required();
  t->add_option("--snr,--snrs", theory.snrs, "Comma-separated SNR values")->delimiter(',')->required();
  t->add_option("--sigma-w2", theory.sigma_w2, "Teacher weight variance")->capture_default_str();
  t->add_option("--out", theory.out, "Output CSV path, '-' for stdout")->capture_default_str();

  SweepArgs sweep;
  auto* s = app.add_subcommand("sweep", "Ensemble sweep over sample size and SNR");
  s->add_option("--preset", sweep.preset, "fig1, fig2 or fig3");
  s->add_option("--config", sweep.config_path, "JSON sweep configuration");
  s->add_option("--alphas", sweep.alphas, "n/d grid (linear-linear)")->delimiter(',');
  s->add_option("--gammas", sweep.gammas, "n/(d k) grid (relu pairs)")->delimiter(',');
  s->add_option("--snrs", sweep.snrs, "SNR grid")->delimiter(',');
  s->add_option("--ensembles", sweep.ensembles, "Replicates per cell (>= 2)");
  s->add_option("--d", sweep.d, "Input dimension");
  s->add_option("--k", sweep.k, "Hidden units");
  s->add_option("--n-test", sweep.n_test, "Test inputs for generalization error");
  s->add_option("--n-cce", sweep.n_cce, "Test inputs used for CCE");
  s->add_option("--seed", sweep.seed, "Master seed");
  s->add_option("--solver", sweep.solver, "oracle or gd (linear nets only)");
  s->add_option("--pair", sweep.pair, "linear-linear, relu-relu or linear-relu");
  s->add_option("--workers", sweep.workers, "Worker threads (0 = all cores)");
  s->add_option("--max-steps", sweep.max_steps, "Gradient-descent step budget");
  s->add_option("--lr-factor", sweep.lr_factor, "Learning-rate factor");
  s->add_option("--sigma-w2", sweep.sigma_w2, "Teacher weight variance");
  s->add_flag("--identical-datasets", sweep.identical, "Debug: train both nets on the same data");
  s->add_option("--out", sweep.out, "Output CSV path, '-' for stdout")->capture_default_str();
  s->get_option("--alphas")->excludes("--gammas");

  CceArgs cce;
  auto* c = app.add_subcommand("cce", "CCE and Information Imbalance between two CSV representations");
  c->add_option("file_a", cce.file_a, "Representation A (one row per point)")->required();
  c->add_option("file_b", cce.file_b, "Representation B (same rows as A)")->required();
  c->add_option("--subsample", cce.subsample, "Use this many random rows");
  c->add_option("--seed", cce.seed, "Subsample seed")->capture_default_str();

  MnistArgs mnist;
  auto* m = app.add_subcommand("mnist-sweep", "Label-noise sweep on MNIST");
  m->add_option("--preset", mnist.preset, "smoke or fig5-mnist")->capture_default_str();
  m->add_option("--mnist-dir", mnist.mnist_dir, std::string("Directory with the IDX files (or $") + kMnistEnv + ")");
  m->add_option("--k", mnist.k, "Hidden units");
  m->add_option("--n-grid", mnist.n_grid, "Training subset sizes")->delimiter(',');
  m->add_option("--p", mnist.p_list, "Label-noise rates")->delimiter(',');
  m->add_option("--replicates", mnist.replicates, "Replicates per cell (>= 2)");
  m->add_option("--epochs", mnist.epochs, "SGD epochs");
  m->add_option("--n-cce", mnist.n_cce, "Test images used for CCE");
  m->add_option("--seed", mnist.seed, "Master seed");
  m->add_option("--workers", mnist.workers, "Worker threads (0 = all cores)");
  m->add_option("--out", mnist.out, "Output CSV path, '-' for stdout")->capture_default_str();

  DatasetArgs dataset;
  auto* g = app.add_subcommand("dataset", "Write a teacher-generated regression dataset as CSV");
  g->add_option("--d", dataset.d, "Input dimension")->capture_default_str();
  g->add_option("--n", dataset.n, "Samples")->capture_default_str();
  g->add_option("--snr", dataset.snr, "Signal-to-noise ratio")->capture_default_str();
  g->add_option("--sigma-w2", dataset.sigma_w2, "Teacher weight variance")->capture_default_str();
  g->add_option("--seed", dataset.seed, "Seed")->capture_default_str();
  g->add_option("--out", dataset.out, "Output CSV path, '-' for stdout")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? ok : usage;
  }

  try {
    if (*t) cmd_theory(theory, out);
    else if (*s) cmd_sweep(sweep, out, err);
    else if (*c) cmd_cce(cce, out);
    else if (*m) cmd_mnist(mnist, out, err);
    else if (*g) cmd_dataset(dataset, out);
  } catch (const Error& e) {
    err << "error (" << to_string(e.kind()) << "): " << e.what() << '\n';
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return numerical;
  }
  return ok;
}

}  // namespace alignlab::cli
