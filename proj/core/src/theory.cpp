#include "alignlab/theory.hpp"

#include "alignlab/error.hpp"
#include "alignlab/metrics.hpp"

#include <Eigen/Eigenvalues>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

namespace alignlab {

namespace {

void require_alpha(double alpha) {
  if (!(alpha > 0.0) || !std::isfinite(alpha))
    fail(ErrorKind::domain, "alpha must be positive and finite, got " + std::to_string(alpha));
}

void require_variances(double sigma_w2, double sigma_eps2) {
  if (!(sigma_w2 >= 0.0) || !(sigma_eps2 >= 0.0) || !std::isfinite(sigma_w2) ||
      !std::isfinite(sigma_eps2))
    fail(ErrorKind::domain, "variances must be finite and non-negative");
}

// Integrates g over [theta_lo, theta_hi] in the angular variable
// lambda = c - h cos(theta); the density's square root becomes h sin(theta).
double bulk_integral_on(double alpha, double theta_lo, double theta_hi,
                        const std::function<double(double)>& g, double tolerance) {
  const MpEdges e = mp_edges(alpha);
  const double c = 0.5 * (e.upper + e.lower);
  const double h = 0.5 * (e.upper - e.lower);
  auto integrand = [&](double theta) {
    const double lambda = c - h * std::cos(theta);
    const double s = std::sin(theta);
    if (lambda <= 0.0) {
      // Only reachable at alpha = 1, theta = 0, where sin^2 / lambda -> 2 / h.
      return g(0.0) * h / std::numbers::pi;
    }
    return g(lambda) * h * h * s * s / (2.0 * std::numbers::pi * lambda);
  };
  double error = 0.0;
  return boost::math::quadrature::gauss_kronrod<double, 15>::integrate(integrand, theta_lo, theta_hi,
                                                                      20, tolerance, &error);
}

}  // namespace

void Spectrum::validate() const {
  if (d < 1) fail(ErrorKind::domain, "spectrum dimension must be >= 1");
  if (rank() > d) fail(ErrorKind::domain, "spectrum has more eigenvalues than its dimension");
  if (eigenvalues.empty()) fail(ErrorKind::domain, "spectrum has no non-zero eigenvalues");
  for (std::size_t i = 0; i < eigenvalues.size(); ++i) {
    const double v = eigenvalues[i];
    if (!(v > 0.0) || !std::isfinite(v))
      fail(ErrorKind::domain, "spectrum entry " + std::to_string(i) + " is not a positive finite value");
    if (i > 0 && v > eigenvalues[i - 1])
      fail(ErrorKind::domain, "spectrum must be sorted in descending order");
  }
}

MpEdges mp_edges(double alpha) {
  require_alpha(alpha);
  const double r = std::sqrt(alpha);
  return {(1.0 - r) * (1.0 - r), (1.0 + r) * (1.0 + r)};
}

double mp_density(double lambda, double alpha) {
  const MpEdges e = mp_edges(alpha);
  if (lambda < 0.0) fail(ErrorKind::domain, "eigenvalue must be non-negative");
  if (lambda <= e.lower || lambda >= e.upper) return 0.0;
  return std::sqrt((e.upper - lambda) * (lambda - e.lower)) / (2.0 * std::numbers::pi * lambda);
}

double mp_zero_mass(double alpha) {
  require_alpha(alpha);
  return std::max(1.0 - alpha, 0.0);
}

double mp_bulk_integral(double alpha, const std::function<double(double)>& g, double tolerance) {
  require_alpha(alpha);
  return bulk_integral_on(alpha, 0.0, std::numbers::pi, g, tolerance);
}

double mp_bulk_mass(double alpha) {
  return mp_bulk_integral(alpha, [](double) { return 1.0; });
}

double mp_bulk_inverse_moment(double alpha) {
  require_alpha(alpha);
  if (alpha == 1.0) fail(ErrorKind::divergent, "inverse moment diverges at alpha = 1");
  return mp_bulk_integral(alpha, [](double lambda) { return 1.0 / lambda; });
}

double mp_bulk_inverse_moment_closed(double alpha) {
  require_alpha(alpha);
  if (alpha == 1.0) fail(ErrorKind::divergent, "inverse moment diverges at alpha = 1");
  return alpha > 1.0 ? 1.0 / (alpha - 1.0) : alpha / (1.0 - alpha);
}

double mp_cdf(double lambda, double alpha) {
  const MpEdges e = mp_edges(alpha);
  if (lambda < 0.0) return 0.0;
  const double atom = mp_zero_mass(alpha);
  if (lambda <= e.lower) return atom;
  if (lambda >= e.upper) return atom + mp_bulk_mass(alpha);
  const double c = 0.5 * (e.upper + e.lower);
  const double h = 0.5 * (e.upper - e.lower);
  const double theta = std::acos(std::clamp((c - lambda) / h, -1.0, 1.0));
  return atom + bulk_integral_on(alpha, 0.0, theta, [](double) { return 1.0; }, 1e-10);
}

double rho_star(double alpha, double snr) {
  require_alpha(alpha);
  if (std::isnan(snr) || snr < 0.0)
    fail(ErrorKind::domain, "SNR must be non-negative, got " + std::to_string(snr));
  if (alpha == 1.0 || snr == 0.0) return 0.0;
  if (std::isinf(snr)) return alpha > 1.0 ? 1.0 : alpha;
  if (alpha > 1.0) return snr / (snr + 1.0 / (alpha - 1.0));
  return alpha * snr / (snr + 1.0 / (1.0 - alpha));
}

double cce_theory(double alpha, double snr) {
  const double rho = rho_star(alpha, snr);
  // rho = 1 only in the noiseless limit, where the CCE is unbounded.
  if (rho >= 1.0) return std::numeric_limits<double>::infinity();
  return cce_gaussian_closed_form(rho);
}

double rho_finite(const Spectrum& spec_a, const Spectrum& spec_b, double sigma_w2,
                  double sigma_eps2) {
  spec_a.validate();
  spec_b.validate();
  require_variances(sigma_w2, sigma_eps2);
  if (spec_a.rank() != spec_b.rank())
    fail(ErrorKind::domain, "spectra must have equal rank (" + std::to_string(spec_a.rank()) +
                                " vs " + std::to_string(spec_b.rank()) + ")");
  auto denom_sum = [&](const Spectrum& s) {
    double total = 0.0;
    for (double lambda : s.eigenvalues) total += sigma_w2 + sigma_eps2 / lambda;
    return total;
  };
  const double numerator = static_cast<double>(spec_a.rank()) * sigma_w2;
  const double denominator = std::sqrt(denom_sum(spec_a) * denom_sum(spec_b));
  if (denominator == 0.0) return 0.0;
  return numerator / denominator;
}

double gen_error_finite(const Spectrum& spectrum, double sigma_w2, double sigma_eps2) {
  spectrum.validate();
  require_variances(sigma_w2, sigma_eps2);
  double learned = 0.0;
  for (double lambda : spectrum.eigenvalues) learned += sigma_w2 - sigma_eps2 / lambda;
  return sigma_w2 + sigma_eps2 - learned / static_cast<double>(spectrum.d);
}

double gen_error_asymptotic(double alpha, double sigma_w2, double sigma_eps2) {
  require_alpha(alpha);
  require_variances(sigma_w2, sigma_eps2);
  if (alpha == 1.0) {
    if (sigma_eps2 > 0.0)
      fail(ErrorKind::divergent, "generalization error diverges at the interpolation threshold");
    return 0.0;
  }
  const double learned = mp_bulk_integral(
      alpha, [&](double lambda) { return sigma_w2 - sigma_eps2 / lambda; });
  return sigma_w2 + sigma_eps2 - learned;
}

TheoryPoint theory_point(double alpha, double snr_value, double sigma_w2) {
  const TeacherConfig cfg = config_for_snr(1, snr_value, sigma_w2);
  TheoryPoint p;
  p.alpha = alpha;
  p.snr = snr_value;
  p.sigma_w2 = cfg.sigma_w2;
  p.sigma_eps2 = cfg.sigma_eps2;
  p.rho_star = rho_star(alpha, snr_value);
  p.cce = cce_theory(alpha, snr_value);
  try {
    p.gen_error = gen_error_asymptotic(alpha, cfg.sigma_w2, cfg.sigma_eps2);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::divergent) throw;
    p.gen_error = std::numeric_limits<double>::infinity();
  }
  return p;
}

OracleSolution v_star_oracle(const RegressionDataset& data, double rank_tolerance) {
  if (data.n() < 1 || data.d() < 1) fail(ErrorKind::degenerate_input, "empty dataset");
  if (data.y.size() != data.n()) fail(ErrorKind::shape, "dataset x and y lengths differ");
  const Matrix gram = data.x.transpose() * data.x;
  Eigen::SelfAdjointEigenSolver<Matrix> solver(gram);
  if (solver.info() != Eigen::Success)
    fail(ErrorKind::degenerate_input, "eigendecomposition of X^T X failed");

  const Index d = data.d();
  OracleSolution out;
  out.basis = solver.eigenvectors().rowwise().reverse();
  out.all_eigenvalues = solver.eigenvalues().reverse();
  const double lambda_max = out.all_eigenvalues(0);
  if (!(lambda_max > 0.0)) fail(ErrorKind::degenerate_input, "data matrix is identically zero");

  const Vector projected = out.basis.transpose() * (data.x.transpose() * data.y);
  out.coefficients = Vector::Zero(d);
  out.spectrum.d = d;
  for (Index i = 0; i < d; ++i) {
    const double lambda = out.all_eigenvalues(i);
    if (lambda <= rank_tolerance * lambda_max) break;
    out.coefficients(i) = projected(i) / lambda;
    out.spectrum.eigenvalues.push_back(lambda);
  }
  return out;
}

}  // namespace alignlab
