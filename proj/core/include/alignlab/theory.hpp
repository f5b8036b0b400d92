#pragma once

// Closed-form and quadrature predictions for two-layer linear students of a
// noisy linear teacher: Marchenko-Pastur spectrum, asymptotic correlation of
// independently trained representations, theoretical CCE and generalization
// error, and the global-minimum solution itself.

#include "alignlab/rng.hpp"
#include "alignlab/teacher_student.hpp"

#include <functional>
#include <vector>

namespace alignlab {

/// Non-zero eigenvalues of X^T X (sorted descending) and the ambient dimension.
struct Spectrum {
  std::vector<double> eigenvalues;
  Index d = 0;

  Index rank() const { return static_cast<Index>(eigenvalues.size()); }
  void validate() const;
};

struct MpEdges {
  double lower;
  double upper;
};

/// lambda_{-/+} = (1 -/+ sqrt(alpha))^2.
MpEdges mp_edges(double alpha);

/// Continuous part of the Marchenko-Pastur density for X^T X with
/// x ~ N(0, I/d) and alpha = n/d; the atom at zero is mp_zero_mass().
double mp_density(double lambda, double alpha);

/// (1 - alpha)^+.
double mp_zero_mass(double alpha);

/// Integral of g(lambda) against the continuous part of the density, by
/// adaptive Gauss-Kronrod quadrature after the substitution
/// lambda = c + h cos(theta), which removes the square-root edge behaviour.
double mp_bulk_integral(double alpha, const std::function<double(double)>& g,
                        double tolerance = 1e-10);

double mp_bulk_mass(double alpha);

/// Integral of f(lambda)/lambda over the bulk. Diverges at alpha = 1.
double mp_bulk_inverse_moment(double alpha);

/// Closed-form counterpart: 1/(alpha-1) for alpha > 1, alpha/(1-alpha) for
/// alpha < 1.
double mp_bulk_inverse_moment_closed(double alpha);

/// Cumulative distribution including the atom at zero.
double mp_cdf(double lambda, double alpha);

/// Asymptotic correlation of independently trained first-layer directions.
/// snr may be +infinity. Returns 0 at alpha = 1.
double rho_star(double alpha, double snr);

/// cce_gaussian_closed_form(rho_star(alpha, snr)).
double cce_theory(double alpha, double snr);

/// Finite-size correlation from two empirical spectra of equal rank R:
/// R sw2 / sqrt(sum_i (sw2 + se2/la_i) * sum_i (sw2 + se2/lb_i)).
double rho_finite(const Spectrum& spec_a, const Spectrum& spec_b, double sigma_w2,
                  double sigma_eps2);

/// sw2 + se2 - (1/d) sum_i (sw2 - se2 / lambda_i).
double gen_error_finite(const Spectrum& spectrum, double sigma_w2, double sigma_eps2);

/// sw2 + se2 - integral (sw2 - se2/lambda) f(lambda) dlambda over the bulk;
/// directions in the zero atom are never learned and keep their full sw2.
/// Throws ErrorKind::divergent at alpha = 1 when sigma_eps2 > 0.
double gen_error_asymptotic(double alpha, double sigma_w2, double sigma_eps2);

struct TheoryPoint {
  double alpha = 0.0;
  double snr = 0.0;
  double rho_star = 0.0;
  double cce = 0.0;
  double gen_error = 0.0;  // +inf at the interpolation threshold
  double sigma_w2 = 1.0;
  double sigma_eps2 = 1.0;
};

/// Evaluates all predictions at (alpha, snr) with sigma_eps2 = sigma_w2 / snr.
TheoryPoint theory_point(double alpha, double snr, double sigma_w2 = 1.0);

/// Global minimum reached by gradient descent from small initialization:
/// the minimum-norm least-squares map, expressed in the eigenbasis of X^T X.
struct OracleSolution {
  Vector coefficients;  // v*: (y X V)_i / lambda_i, zero on null directions
  Matrix basis;         // V, columns sorted by descending eigenvalue
  Spectrum spectrum;    // non-zero eigenvalues only
  Vector all_eigenvalues;

  /// The end-to-end student map v* V^T as a d-vector.
  Vector total_map() const { return basis * coefficients; }
};

/// Eigenvalues below rank_tolerance * lambda_max are treated as zero.
OracleSolution v_star_oracle(const RegressionDataset& data, double rank_tolerance = 1e-10);

}  // namespace alignlab
