#include "alignlab/experiments.hpp"

#include "alignlab/error.hpp"
#include "alignlab/metrics.hpp"
#include "alignlab/parallel.hpp"
#include "alignlab/table_io.hpp"
#include "alignlab/theory.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <ctime>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#ifndef ALIGNLAB_VERSION
#define ALIGNLAB_VERSION "unknown"
#endif

namespace alignlab {

namespace {

std::string cell_label(const CellSpec& cell) {
  std::ostringstream s;
  s << "[cell n=" << cell.n << " snr=" << format_double(cell.snr) << " d=" << cell.d
    << " k=" << cell.k << " pair=" << to_string(cell.pair) << "]";
  return s.str();
}

bool is_relu(ActivationPair pair, bool side_b) {
  switch (pair) {
    case ActivationPair::linear_linear: return false;
    case ActivationPair::relu_relu: return true;
    case ActivationPair::linear_relu: return side_b;
  }
  return false;
}

struct TrainedNet {
  TwoLayerNet net;
  long steps = 0;
  bool converged = true;
};

TrainedNet fit_student(const CellSpec& cell, const RegressionDataset& data, bool relu,
                       std::uint64_t init_seed, std::uint64_t gauge_seed) {
  TrainedNet out;
  if (!relu && cell.solver == Solver::oracle) {
    out.net = from_total_map(v_star_oracle(data).total_map(), cell.k, gauge_seed);
    return out;
  }
  out.net = init_small(cell.d, cell.k, relu ? Activation::relu : Activation::linear,
                       cell.gd.init_scale, init_seed);
  TrainConfig tc;
  tc.init_scale = cell.gd.init_scale;
  tc.learning_rate = stable_learning_rate(data, cell.gd.lr_factor);
  tc.max_steps = cell.gd.max_steps;
  tc.rel_tol = cell.gd.rel_tol;
  tc.patience = cell.gd.patience;
  const TrainReport report = train_full_batch(out.net, data, tc);
  out.steps = report.steps;
  out.converged = report.converged;
  return out;
}

void validate_cell(const CellSpec& cell) {
  if (cell.d < 1 || cell.k < 1 || cell.n < 1)
    fail(ErrorKind::config, "cell needs d, k, n >= 1");
  if (cell.n_cce < 9 || cell.n_cce > cell.n_test)
    fail(ErrorKind::config, "n_cce must lie in [9, n_test]");
  if (std::isnan(cell.snr) || cell.snr < 0.0) fail(ErrorKind::config, "snr must be non-negative");
}

std::string utc_timestamp() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string optional_field(const std::optional<double>& v) {
  return v ? format_double(*v) : std::string();
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_number(const std::string& text) {
  if (text == "nan") return std::numeric_limits<double>::quiet_NaN();
  if (text == "inf") return std::numeric_limits<double>::infinity();
  if (text == "-inf") return -std::numeric_limits<double>::infinity();
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size())
    fail(ErrorKind::format, "bad number '" + text + "' in sweep CSV");
  return v;
}

}  // namespace

std::string_view to_string(Solver solver) { return solver == Solver::oracle ? "oracle" : "gd"; }

std::string_view to_string(ActivationPair pair) {
  switch (pair) {
    case ActivationPair::linear_linear: return "linear-linear";
    case ActivationPair::relu_relu: return "relu-relu";
    case ActivationPair::linear_relu: return "linear-relu";
  }
  return "?";
}

Solver parse_solver(std::string_view name) {
  if (name == "oracle") return Solver::oracle;
  if (name == "gd") return Solver::gd;
  fail(ErrorKind::config, "unknown solver '" + std::string(name) + "' (expected oracle or gd)");
}

ActivationPair parse_activation_pair(std::string_view name) {
  if (name == "linear-linear") return ActivationPair::linear_linear;
  if (name == "relu-relu") return ActivationPair::relu_relu;
  if (name == "linear-relu") return ActivationPair::linear_relu;
  fail(ErrorKind::config, "unknown activation pair '" + std::string(name) +
                              "' (expected linear-linear, relu-relu or linear-relu)");
}

bool uses_gamma_axis(ActivationPair pair) { return pair != ActivationPair::linear_linear; }

void SweepConfig::validate() const {
  if (d < 1 || k < 1) fail(ErrorKind::config, "d and k must be >= 1");
  if (axis.empty() || snrs.empty()) fail(ErrorKind::config, "sample-size and SNR grids must be non-empty");
  if (ensembles < 2) fail(ErrorKind::config, "ensembles must be >= 2, got " + std::to_string(ensembles));
  if (n_cce < 9 || n_cce > n_test)
    fail(ErrorKind::config, "n_cce must lie in [9, n_test], got " + std::to_string(n_cce));
  for (double a : axis)
    if (!(a > 0.0) || !std::isfinite(a)) fail(ErrorKind::config, "grid values must be positive");
  for (double s : snrs)
    if (std::isnan(s) || s < 0.0) fail(ErrorKind::config, "SNR values must be non-negative");
  if (!(sigma_w2 > 0.0)) fail(ErrorKind::config, "sigma_w2 must be positive");
  if (!(gd.init_scale > 0.0) || !(gd.lr_factor > 0.0) || gd.max_steps < 1 || !(gd.rel_tol > 0.0) ||
      gd.patience < 1)
    fail(ErrorKind::config, "gradient-descent settings must be positive");
  for (double a : axis)
    if (sample_size(a) < 1) fail(ErrorKind::config, "grid value " + format_double(a) + " gives n < 1");
}

Index SweepConfig::sample_size(double axis_value) const {
  const double scale = uses_gamma_axis(pair) ? static_cast<double>(d * k) : static_cast<double>(d);
  return static_cast<Index>(std::llround(axis_value * scale));
}

PairState train_pair(const CellSpec& cell, std::uint64_t seed) {
  validate_cell(cell);
  try {
    PairState s;
    s.teacher = sample_teacher(config_for_snr(cell.d, cell.snr, cell.sigma_w2),
                               derive_seed(seed, Stream::teacher));
    s.data_a = sample_dataset(s.teacher, cell.n, derive_seed(seed, Stream::dataset_a));
    const bool shared = cell.identical_datasets || cell.pair == ActivationPair::linear_relu;
    s.data_b = shared ? s.data_a : sample_dataset(s.teacher, cell.n, derive_seed(seed, Stream::dataset_b));

    TrainedNet a = fit_student(cell, s.data_a, is_relu(cell.pair, false),
                               derive_seed(seed, Stream::init_a), derive_seed(seed, {static_cast<std::uint64_t>(Stream::gauge), 0}));
    TrainedNet b = fit_student(cell, s.data_b, is_relu(cell.pair, true),
                               derive_seed(seed, Stream::init_b), derive_seed(seed, {static_cast<std::uint64_t>(Stream::gauge), 1}));
    s.net_a = std::move(a.net);
    s.net_b = std::move(b.net);
    s.steps_a = a.steps;
    s.steps_b = b.steps;
    s.converged_a = a.converged;
    s.converged_b = b.converged;
    s.x_test = sample_inputs(cell.n_test, cell.d, derive_seed(seed, Stream::test_set));
    return s;
  } catch (const Error& e) {
    fail(e.kind(), std::string(e.what()) + " " + cell_label(cell));
  }
}

ReplicateRecord evaluate_pair(const CellSpec& cell, const PairState& s, std::uint64_t seed) {
  ReplicateRecord r;
  r.gen_err_a = empirical_gen_error(s.net_a, s.teacher, s.x_test);
  r.gen_err_b = empirical_gen_error(s.net_b, s.teacher, s.x_test);

  Rng rng = make_rng(derive_seed(seed, Stream::subsample));
  const auto rows = sample_without_replacement(s.x_test.rows(), cell.n_cce, rng);
  Matrix x_sub(static_cast<Index>(rows.size()), s.x_test.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) x_sub.row(static_cast<Index>(i)) = s.x_test.row(rows[i]);

  const AlignmentScore score = cce_between(PointSet(hidden(s.net_a, x_sub)), PointSet(hidden(s.net_b, x_sub)));
  r.cce_ab = score.cce_ab;
  r.cce_ba = score.cce_ba;
  r.ii_ab = score.ii_ab;
  r.ii_ba = score.ii_ba;
  r.steps_a = s.steps_a;
  r.steps_b = s.steps_b;
  r.converged_a = s.converged_a;
  r.converged_b = s.converged_b;
  return r;
}

ReplicateRecord run_pair(const CellSpec& cell, std::uint64_t seed) {
  const PairState state = train_pair(cell, seed);
  try {
    return evaluate_pair(cell, state, seed);
  } catch (const Error& e) {
    fail(e.kind(), std::string(e.what()) + " " + cell_label(cell));
  }
}

Summary summarize(const std::vector<double>& values) {
  Summary s;
  double sum = 0.0;
  for (double v : values)
    if (std::isfinite(v)) {
      sum += v;
      ++s.count;
    }
  if (s.count == 0) {
    s.mean = std::numeric_limits<double>::quiet_NaN();
    s.std_error = std::numeric_limits<double>::quiet_NaN();
    return s;
  }
  s.mean = sum / s.count;
  if (s.count < 2) {
    s.std_error = 0.0;
    return s;
  }
  double ss = 0.0;
  for (double v : values)
    if (std::isfinite(v)) ss += (v - s.mean) * (v - s.mean);
  s.std_error = std::sqrt(ss / (s.count - 1) / s.count);
  return s;
}

const SweepRow& SweepResult::at(double axis, double snr) const {
  for (const auto& row : rows)
    if (row.axis == axis && row.snr == snr) return row;
  fail(ErrorKind::invalid_input, "no sweep row at (" + format_double(axis) + ", " + format_double(snr) + ")");
}

SweepResult run_sweep(const SweepConfig& config) {
  config.validate();
  const std::size_t n_axis = config.axis.size();
  const std::size_t n_snr = config.snrs.size();
  const auto n_rep = static_cast<std::size_t>(config.ensembles);
  const std::size_t total = n_axis * n_snr * n_rep;

  struct Outcome {
    std::optional<ReplicateRecord> record;
    std::string error;
  };
  std::vector<Outcome> outcomes(total);

  parallel_for(total, config.workers, [&](std::size_t idx) {
    const std::size_t rep = idx % n_rep;
    const std::size_t si = (idx / n_rep) % n_snr;
    const std::size_t ai = idx / (n_rep * n_snr);
    CellSpec cell;
    cell.d = config.d;
    cell.k = config.k;
    cell.n = config.sample_size(config.axis[ai]);
    cell.snr = config.snrs[si];
    cell.sigma_w2 = config.sigma_w2;
    cell.pair = config.pair;
    cell.solver = config.solver;
    cell.n_test = config.n_test;
    cell.n_cce = config.n_cce;
    cell.gd = config.gd;
    cell.identical_datasets = config.identical_datasets;
    const std::uint64_t seed = derive_seed(config.master_seed, {ai, si, rep});
    try {
      outcomes[idx].record = run_pair(cell, seed);
    } catch (const std::exception& e) {
      outcomes[idx].error = "replicate " + std::to_string(rep) + ": " + e.what();
    }
  });

  SweepResult result;
  result.config = config;
  result.version = library_version();
  result.timestamp = utc_timestamp();
  std::size_t failures = 0;
  for (std::size_t ai = 0; ai < n_axis; ++ai) {
    for (std::size_t si = 0; si < n_snr; ++si) {
      SweepRow row;
      row.axis = config.axis[ai];
      row.snr = config.snrs[si];
      row.n = config.sample_size(row.axis);
      std::vector<double> cab, cba, ga, gb;
      for (std::size_t rep = 0; rep < n_rep; ++rep) {
        const Outcome& o = outcomes[(ai * n_snr + si) * n_rep + rep];
        if (!o.record) {
          ++row.failures;
          row.errors.push_back(o.error);
          continue;
        }
        row.replicates.push_back(*o.record);
        cab.push_back(o.record->cce_ab);
        cba.push_back(o.record->cce_ba);
        ga.push_back(o.record->gen_err_a);
        gb.push_back(o.record->gen_err_b);
      }
      row.n_replicates = static_cast<int>(row.replicates.size());
      row.cce_ab = summarize(cab);
      row.cce_ba = summarize(cba);
      row.gen_err_a = summarize(ga);
      row.gen_err_b = summarize(gb);
      if (config.pair == ActivationPair::linear_linear) {
        const TheoryPoint tp = theory_point(row.axis, row.snr, config.sigma_w2);
        row.cce_theory = tp.cce;
        row.gen_err_theory = tp.gen_error;
      }
      failures += static_cast<std::size_t>(row.failures);
      result.rows.push_back(std::move(row));
    }
  }
  if (failures * 10 > total) {
    std::string first;
    for (const auto& row : result.rows)
      if (!row.errors.empty()) {
        first = row.errors.front();
        break;
      }
    fail(ErrorKind::sweep_failed, std::to_string(failures) + " of " + std::to_string(total) +
                                      " cells failed (limit 10%); first error: " + first);
  }
  return result;
}

const char* const kSweepCsvColumns =
    "alpha,snr,n,cce_ab_mean,cce_ab_stderr,cce_ba_mean,cce_ba_stderr,gen_err_a_mean,"
    "gen_err_a_stderr,gen_err_b_mean,gen_err_b_stderr,cce_theory,gen_err_theory,n_replicates,failures";

void emit_csv(std::ostream& out, const SweepResult& result) {
  const SweepConfig& c = result.config;
  out << "# alignlab sweep\n";
  out << "# version: " << (result.version.empty() ? library_version() : result.version) << '\n';
  out << "# timestamp: " << result.timestamp << '\n';
  out << "# axis: "
      << (uses_gamma_axis(c.pair) ? "gamma = n / (d k)" : "alpha = n / d") << "; network a = "
      << (c.pair == ActivationPair::relu_relu ? "relu" : "linear") << ", network b = "
      << (c.pair == ActivationPair::linear_linear ? "linear" : "relu") << '\n';
  out << "# config: " << sweep_config_to_json(c) << '\n';
  for (const auto& row : result.rows)
    for (const auto& e : row.errors)
      out << "# failure alpha=" << format_double(row.axis) << " snr=" << format_double(row.snr)
          << ": " << e << '\n';
  out << kSweepCsvColumns << '\n';
  for (const auto& row : result.rows) {
    out << format_double(row.axis) << ',' << format_double(row.snr) << ',' << row.n << ','
        << format_double(row.cce_ab.mean) << ',' << format_double(row.cce_ab.std_error) << ','
        << format_double(row.cce_ba.mean) << ',' << format_double(row.cce_ba.std_error) << ','
        << format_double(row.gen_err_a.mean) << ',' << format_double(row.gen_err_a.std_error) << ','
        << format_double(row.gen_err_b.mean) << ',' << format_double(row.gen_err_b.std_error) << ','
        << optional_field(row.cce_theory) << ',' << optional_field(row.gen_err_theory) << ','
        << row.n_replicates << ',' << row.failures << '\n';
  }
}

void emit_csv(const std::filesystem::path& path, const SweepResult& result) {
  std::ofstream out(path);
  if (!out) fail(ErrorKind::io, "cannot open '" + path.string() + "' for writing");
  emit_csv(out, result);
  out.flush();
  if (!out) fail(ErrorKind::io, "write to '" + path.string() + "' failed");
}

std::vector<SweepRow> parse_sweep_csv(std::istream& in) {
  std::vector<SweepRow> rows;
  std::string line;
  bool seen_header = false;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (!seen_header) {
      if (line != kSweepCsvColumns) fail(ErrorKind::format, "unexpected sweep CSV header '" + line + "'");
      seen_header = true;
      continue;
    }
    const auto f = split_csv_line(line);
    if (f.size() != 15)
      fail(ErrorKind::format, "sweep CSV row has " + std::to_string(f.size()) + " fields, expected 15");
    SweepRow r;
    r.axis = parse_number(f[0]);
    r.snr = parse_number(f[1]);
    r.n = static_cast<Index>(parse_number(f[2]));
    r.cce_ab = {parse_number(f[3]), parse_number(f[4]), 0};
    r.cce_ba = {parse_number(f[5]), parse_number(f[6]), 0};
    r.gen_err_a = {parse_number(f[7]), parse_number(f[8]), 0};
    r.gen_err_b = {parse_number(f[9]), parse_number(f[10]), 0};
    if (!f[11].empty()) r.cce_theory = parse_number(f[11]);
    if (!f[12].empty()) r.gen_err_theory = parse_number(f[12]);
    r.n_replicates = static_cast<int>(parse_number(f[13]));
    r.failures = static_cast<int>(parse_number(f[14]));
    r.cce_ab.count = r.cce_ba.count = r.gen_err_a.count = r.gen_err_b.count = r.n_replicates;
    rows.push_back(std::move(r));
  }
  return rows;
}

std::string library_version() { return ALIGNLAB_VERSION; }

}  // namespace alignlab
