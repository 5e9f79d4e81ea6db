#pragma once

#include <Eigen/Dense>

#include <limits>
#include <vector>

namespace guas {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Orthonormal bases of the numerical null space and of its orthogonal
/// complement (the row space) of a matrix, with the singular values used to
/// decide the rank.
struct NullSpace {
  Matrix basis;       // n x k, orthonormal columns
  Matrix complement;  // n x (n-k), orthonormal columns
  Vector singular_values;
  double threshold = 0.0;
  /// smallest kept singular value over largest discarded one; +inf when
  /// either side is empty or the discarded values are exactly zero
  double rank_margin = kInf;
};

/// Singular values below `rel_tol * sigma_max * sqrt(n)` count as zero.
NullSpace null_space(const Matrix& m, double rel_tol);

/// Null space with an absolute singular-value threshold.
NullSpace null_space_abs(const Matrix& m, double abs_threshold);

/// Deterministic orthonormal basis of span(basis): pivoted Gram-Schmidt on
/// the orthogonal projections of the standard basis vectors, each column
/// signed so its pivot entry is positive. A subspace spanned by coordinate
/// vectors comes back as exactly those vectors in increasing index order.
Matrix canonical_basis(const Matrix& basis);

/// Flip signs so the largest-magnitude entry of each column is positive
/// (lowest index wins ties within 1e-12).
void fix_column_signs(Matrix& m);

/// Spectral norm of P_U - P_V for orthonormal bases U, V; 1 when the
/// dimensions differ.
double subspace_distance(const Matrix& u, const Matrix& v);

/// Largest eigenvalue of the symmetric part of `s`, with the eigenvector.
struct ExtremeEigen {
  double value = 0.0;
  Vector vector;
};
ExtremeEigen max_symmetric_eigen(const Matrix& s);

/// Principal square root and inverse square root of an SPD matrix.
struct SpdRoots {
  Matrix sqrt;
  Matrix inv_sqrt;
};
SpdRoots spd_roots(const Matrix& p);

/// exp(m) by scaling and squaring with the degree-13 Pade approximant.
Matrix expm(const Matrix& m);

double spectral_norm(const Matrix& m);
double smallest_singular_value(const Matrix& m);

}  // namespace guas
