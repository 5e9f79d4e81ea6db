#pragma once

#include "guas/decomposition.hpp"

#include <optional>
#include <string>
#include <vector>

namespace guas {

/// [C; CA; CA^2; ...; CA^(k-1)], always built to the full power k - 1.
Matrix kalman_matrix(const Matrix& c, const Matrix& a);

struct PairObservability {
  bool observable = false;
  double sigma_min = 0.0;
  double threshold = 0.0;
  /// orthonormal basis of the numerical unobservable subspace (k x m)
  std::optional<Matrix> unobservable_basis;
};

/// Rank test on the Kalman matrix. A singular value counts as zero when it
/// is at most tol * max(1, sigma_max).
PairObservability pair_observable(const Matrix& c, const Matrix& a, double tol = kDefaultTol);

enum class SweepVerdict { ObservableForAll, FailsAt, Inconclusive };

std::string_view to_string(SweepVerdict v);

struct SweepOptions {
  int n_grid = 257;
  double tol = kDefaultTol;
  /// golden-section bracket width for refining local minima
  double refine_width = 1e-8;
  /// bracket width used to settle minima that end between tol and the
  /// certification threshold after the first refinement
  double polish_width = 1e-14;
};

struct ObservabilityReport {
  std::vector<double> grid;
  std::vector<double> sigma_min;
  SweepVerdict verdict = SweepVerdict::Inconclusive;
  double margin = kInf;
  double margin_lambda = 0.0;
  /// absolute thresholds (already scaled)
  double tol = 0.0;
  double certification_threshold = 0.0;
  double scale = 1.0;
  /// refined local minima (lambda, sigma_min)
  std::vector<std::pair<double, double>> refined_minima;
  std::optional<double> lambda_star;
  std::optional<Vector> witness;  // unit vector in K coordinates
  /// Lipschitz bound for sigma_min(lambda) and whether the grid respects it
  double lipschitz = 0.0;
  bool grid_resolution_ok = true;
  std::vector<double> endpoint_sigma;  // at lambda = 0 and lambda = 1
};

double kalman_sigma_min(const BlockFamily& blocks, double lambda);

/// Lipschitz constant of lambda -> Kalman(C_lambda, A_lambda) in spectral norm.
double kalman_lipschitz_bound(const BlockFamily& blocks);

ObservabilityReport sweep_lambda(const BlockFamily& blocks, const SweepOptions& options = {});

/// Smallest singular value of C_lambda over [0, 1], grid plus refinement;
/// zero when k' < k. Returns (value, argmin).
std::pair<double, double> min_sigma_c(const BlockFamily& blocks, const SweepOptions& options = {});

struct HurwitzObservabilityCheck {
  HurwitzResult hurwitz;
  PairObservability observability;
  Eigen::Index kernel_dim = 0;
  bool agree = false;
  /// Hurwitz, but with abscissa in [-marginal_band, 0); agreement is then
  /// not meaningful. An abscissa within roundoff of zero counts as not Hurwitz.
  bool marginal = false;
};

/// Hurwitz(B) versus observability of (C, A) from the single-matrix block
/// form over ker(B^T + B). Throws NoCommonWeakLyapunov if B^T + B is not
/// negative semidefinite and StructureViolation if D^T + D is not negative
/// definite on the complement.
HurwitzObservabilityCheck hurwitz_observability_crosscheck(const Matrix& b,
                                                           double tol = kDefaultTol,
                                                           double marginal_band = kDefaultTol);

}  // namespace guas
