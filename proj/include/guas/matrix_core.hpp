#pragma once

#include "guas/linalg.hpp"

#include <array>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace guas {

inline constexpr double kDefaultTol = 1e-9;

/// The raw pair (B0, B1) with an optional common Lyapunov candidate P.
struct MatrixPair {
  Matrix b0;
  Matrix b1;
  std::optional<Matrix> p;

  Eigen::Index dim() const { return b0.rows(); }
};

/// Validates squareness, matching dimensions and (when present) that P is
/// symmetric positive definite. Throws DimensionMismatch / NotPositiveDefinite.
MatrixPair make_pair(Matrix b0, Matrix b1, std::optional<Matrix> p = std::nullopt,
                     double tol = kDefaultTol);

struct NormalizationRecord {
  Matrix p;
  Matrix sqrt_p;
  Matrix inv_sqrt_p;
  bool identity = true;
};

/// Pair expressed in the frame where the Lyapunov matrix is the identity,
/// together with the symmetric parts S_i = B_i^T + B_i.
struct NormalizedPair {
  Matrix b0;
  Matrix b1;
  Matrix s0;
  Matrix s1;
  NormalizationRecord provenance;

  Eigen::Index dim() const { return b0.rows(); }
  const Matrix& b(int i) const { return i == 0 ? b0 : b1; }
  const Matrix& s(int i) const { return i == 0 ? s0 : s1; }
};

struct SemidefVerdict {
  bool holds = true;
  double max_eigenvalue = 0.0;
  double tolerance = 0.0;
  std::optional<Vector> witness;  // present iff !holds
};

/// B^T + B, symmetrized so the result is exactly symmetric.
Matrix symmetric_part(const Matrix& b);

/// tol * (1 + ||S||_F)
double semidef_tolerance(const Matrix& s, double tol);

/// Whether the symmetric matrix `s` is negative semidefinite up to
/// `semidef_tolerance(s, tol)`.
SemidefVerdict check_nonpositive(const Matrix& s, double tol = kDefaultTol);

void validate_spd(const Matrix& p, double tol = kDefaultTol);

/// Verdict i holds iff lambda_max(B_i^T P + P B_i) <= tolerance.
std::pair<SemidefVerdict, SemidefVerdict> check_weak_lyapunov(const MatrixPair& pair,
                                                              const Matrix& p,
                                                              double tol = kDefaultTol);

/// B_i' = P^{1/2} B_i P^{-1/2}. Throws NoCommonWeakLyapunov when P is not a
/// weak common Lyapunov matrix.
NormalizedPair normalize(const MatrixPair& pair, const Matrix& p, double tol = kDefaultTol);

/// Uses `pair.p` when present, the identity otherwise.
NormalizedPair normalize(const MatrixPair& pair, double tol = kDefaultTol);

struct HurwitzResult {
  bool hurwitz = false;
  double abscissa = 0.0;
  bool marginal = false;  // abscissa within [-tol, tol]
};

HurwitzResult is_hurwitz(const Matrix& b, double tol = kDefaultTol);

/// (1 - lambda) B0 + lambda B1; throws LambdaOutOfRange outside [0, 1].
Matrix convex_combination(const Matrix& b0, const Matrix& b1, double lambda);
Matrix convex_combination(const NormalizedPair& pair, double lambda);

/// The curve det M(q, r) = 0 for M = B^T P + P B with P = [[1, q], [q, r]],
/// written as a q^2 + b qr + c r^2 + d q + e r + f.
struct ConicReport {
  std::array<double, 6> coefficients{};
  bool is_ellipse = false;
  /// det M > 0 inside the ellipse (so strict feasibility can only happen there)
  bool interior_positive = false;
  Eigen::Vector2d center = Eigen::Vector2d::Zero();
  Eigen::Vector2d major_axis = Eigen::Vector2d::Zero();
  double semi_major = 0.0;
  double semi_minor = 0.0;
  /// endpoints of the major axis, ordered by increasing r
  std::array<Eigen::Vector2d, 2> vertices{};
  /// bounding box (q_min, q_max, r_min, r_max)
  std::array<double, 4> box{};
  std::vector<Eigen::Vector2d> samples;
};

ConicReport det_conic(const Matrix& b, int n_samples = 64);

struct StrictSearchOptions {
  double tol = kDefaultTol;
  int coarse_grid = 81;
  int zoom_grid = 21;
  int zoom_levels = 60;
  /// search box used when neither conic bounds the feasible region
  double default_q = 10.0;
  double default_r = 100.0;
};

struct StrictLyapunovReport {
  /// (q, r) of a strict common Lyapunov matrix [[1, q], [q, r]], if one was found
  std::optional<Eigen::Vector2d> qr;
  std::optional<Matrix> p;
  /// smallest value of max_i lambda_max(M_i) reached by the search, and where
  double best_value = kInf;
  Eigen::Vector2d best_point = Eigen::Vector2d::Zero();
  std::array<ConicReport, 2> curves;
  std::array<double, 4> search_box{};
  bool box_from_conics = false;
  std::string verdict;
  std::string restriction_note;
};

/// Looks for P = [[1, q], [q, r]] with B_i^T P + P B_i negative definite for
/// both i. Throws DimensionMismatch unless the pair is 2x2.
StrictLyapunovReport strict_lyapunov_2x2(const MatrixPair& pair,
                                         const StrictSearchOptions& options = {});

}  // namespace guas
