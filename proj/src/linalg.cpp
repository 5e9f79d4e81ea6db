#include "guas/linalg.hpp"

#include <Eigen/QR>
#include <Eigen/SVD>

#include <algorithm>
#include <array>
#include <cmath>

namespace guas {

namespace {

NullSpace split_by_threshold(const Matrix& m, double threshold) {
  const Eigen::Index n = m.cols();
  NullSpace out;
  out.threshold = threshold;
  if (n == 0) {
    out.basis.resize(0, 0);
    out.complement.resize(0, 0);
    return out;
  }
  if (m.rows() == 0) {
    out.basis = Matrix::Identity(n, n);
    out.complement.resize(n, 0);
    return out;
  }

  Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeFullV);
  out.singular_values = svd.singularValues();
  const Matrix& v = svd.matrixV();

  Eigen::Index rank = 0;
  while (rank < out.singular_values.size() && out.singular_values(rank) > threshold) {
    ++rank;
  }

  // Columns of V beyond the number of singular values carry an implicit zero.
  double largest_discarded = 0.0;
  if (rank < out.singular_values.size()) {
    largest_discarded = out.singular_values(rank);
  }
  if (rank > 0 && rank < n && largest_discarded > 0.0) {
    out.rank_margin = out.singular_values(rank - 1) / largest_discarded;
  }

  out.basis = canonical_basis(v.rightCols(n - rank));
  out.complement = canonical_basis(v.leftCols(rank));
  return out;
}

}  // namespace

NullSpace null_space(const Matrix& m, double rel_tol) {
  double sigma_max = 0.0;
  if (m.rows() > 0 && m.cols() > 0) {
    sigma_max = spectral_norm(m);
  }
  const double threshold = rel_tol * sigma_max * std::sqrt(static_cast<double>(m.cols()));
  return split_by_threshold(m, threshold);
}

NullSpace null_space_abs(const Matrix& m, double abs_threshold) {
  return split_by_threshold(m, abs_threshold);
}

Matrix canonical_basis(const Matrix& basis) {
  const Eigen::Index n = basis.rows();
  const Eigen::Index k = basis.cols();
  Matrix q(n, k);
  if (k == 0) {
    return q;
  }
  // projector onto the span, whatever the input basis
  const Matrix orth = Eigen::HouseholderQR<Matrix>(basis).householderQ() * Matrix::Identity(n, k);
  Matrix residual = orth * orth.transpose();
  std::vector<bool> used(static_cast<std::size_t>(n), false);

  for (Eigen::Index s = 0; s < k; ++s) {
    Eigen::Index pivot = -1;
    double best = -1.0;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (used[static_cast<std::size_t>(j)]) continue;
      const double nrm = residual.col(j).norm();
      if (nrm > best * (1.0 + 1e-12)) {
        best = nrm;
        pivot = j;
      }
    }
    Vector col = residual.col(pivot) / best;
    // second pass against the already accepted directions
    for (Eigen::Index t = 0; t < s; ++t) {
      col -= q.col(t) * q.col(t).dot(col);
    }
    col.normalize();
    if (col(pivot) < 0.0) col = -col;
    q.col(s) = col;
    used[static_cast<std::size_t>(pivot)] = true;
    for (Eigen::Index j = 0; j < n; ++j) {
      residual.col(j) -= col * col.dot(residual.col(j));
    }
  }
  return q;
}

void fix_column_signs(Matrix& m) {
  for (Eigen::Index c = 0; c < m.cols(); ++c) {
    Eigen::Index pivot = 0;
    double best = -1.0;
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      const double a = std::abs(m(r, c));
      if (a > best + 1e-12) {
        best = a;
        pivot = r;
      }
    }
    if (m.rows() > 0 && m(pivot, c) < 0.0) {
      m.col(c) = -m.col(c);
    }
  }
}

double subspace_distance(const Matrix& u, const Matrix& v) {
  if (u.cols() != v.cols()) return 1.0;
  if (u.cols() == 0) return 0.0;
  const Matrix diff = u * u.transpose() - v * v.transpose();
  return spectral_norm(diff);
}

ExtremeEigen max_symmetric_eigen(const Matrix& s) {
  ExtremeEigen out;
  if (s.rows() == 0) {
    out.value = -kInf;
    return out;
  }
  const Matrix sym = 0.5 * (s + s.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> es(sym);
  const Eigen::Index last = sym.rows() - 1;
  out.value = es.eigenvalues()(last);
  out.vector = es.eigenvectors().col(last);
  return out;
}

SpdRoots spd_roots(const Matrix& p) {
  const Matrix sym = 0.5 * (p + p.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> es(sym);
  const Vector ev = es.eigenvalues();
  const Matrix& vecs = es.eigenvectors();
  SpdRoots out;
  out.sqrt = vecs * ev.cwiseSqrt().asDiagonal() * vecs.transpose();
  out.inv_sqrt = vecs * ev.cwiseSqrt().cwiseInverse().asDiagonal() * vecs.transpose();
  out.sqrt = (0.5 * (out.sqrt + out.sqrt.transpose())).eval();
  out.inv_sqrt = (0.5 * (out.inv_sqrt + out.inv_sqrt.transpose())).eval();
  return out;
}

double spectral_norm(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  Eigen::JacobiSVD<Matrix> svd(m);
  return svd.singularValues()(0);
}

double smallest_singular_value(const Matrix& m) {
  if (m.cols() == 0) return kInf;
  if (m.rows() < m.cols()) return 0.0;
  Eigen::JacobiSVD<Matrix> svd(m);
  return svd.singularValues()(svd.singularValues().size() - 1);
}

// Pade coefficients and switch-over norms from Higham, SIAM J. Matrix Anal.
// Appl. 26(4), 2005.
Matrix expm(const Matrix& a) {
  const Eigen::Index n = a.rows();
  if (n == 0) return Matrix(0, 0);
  const Matrix id = Matrix::Identity(n, n);
  const double norm1 = a.cwiseAbs().colwise().sum().maxCoeff();

  auto solve = [&](const Matrix& u, const Matrix& v) -> Matrix {
    return (v - u).partialPivLu().solve(v + u);
  };

  static constexpr std::array<double, 4> b3 = {120.0, 60.0, 12.0, 1.0};
  static constexpr std::array<double, 6> b5 = {30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0};
  static constexpr std::array<double, 8> b7 = {17297280.0, 8648640.0, 1995840.0, 277200.0,
                                               25200.0,    1512.0,    56.0,      1.0};
  static constexpr std::array<double, 10> b9 = {17643225600.0, 8821612800.0, 2075673600.0,
                                                302702400.0,   30270240.0,   2162160.0,
                                                110880.0,      3960.0,       90.0,
                                                1.0};
  static constexpr std::array<double, 14> b13 = {
      64764752532480000.0, 32382376266240000.0, 7771770303897600.0, 1187353796428800.0,
      129060195264000.0,   10559470521600.0,    670442572800.0,     33522128640.0,
      1323241920.0,        40840800.0,          960960.0,           16380.0,
      182.0,               1.0};

  if (norm1 <= 1.495585217958292e-2) {
    const Matrix a2 = a * a;
    const Matrix u = a * (b3[3] * a2 + b3[1] * id);
    const Matrix v = b3[2] * a2 + b3[0] * id;
    return solve(u, v);
  }
  if (norm1 <= 2.539398330063230e-1) {
    const Matrix a2 = a * a;
    const Matrix a4 = a2 * a2;
    const Matrix u = a * (b5[5] * a4 + b5[3] * a2 + b5[1] * id);
    const Matrix v = b5[4] * a4 + b5[2] * a2 + b5[0] * id;
    return solve(u, v);
  }
  if (norm1 <= 9.504178996162932e-1) {
    const Matrix a2 = a * a;
    const Matrix a4 = a2 * a2;
    const Matrix a6 = a4 * a2;
    const Matrix u = a * (b7[7] * a6 + b7[5] * a4 + b7[3] * a2 + b7[1] * id);
    const Matrix v = b7[6] * a6 + b7[4] * a4 + b7[2] * a2 + b7[0] * id;
    return solve(u, v);
  }
  if (norm1 <= 2.097847961257068) {
    const Matrix a2 = a * a;
    const Matrix a4 = a2 * a2;
    const Matrix a6 = a4 * a2;
    const Matrix a8 = a6 * a2;
    const Matrix u = a * (b9[9] * a8 + b9[7] * a6 + b9[5] * a4 + b9[3] * a2 + b9[1] * id);
    const Matrix v = b9[8] * a8 + b9[6] * a6 + b9[4] * a4 + b9[2] * a2 + b9[0] * id;
    return solve(u, v);
  }

  constexpr double theta13 = 5.371920351148152;
  int squarings = 0;
  if (norm1 > theta13) {
    squarings = static_cast<int>(std::ceil(std::log2(norm1 / theta13)));
  }
  const Matrix as = a / std::ldexp(1.0, squarings);
  const Matrix a2 = as * as;
  const Matrix a4 = a2 * a2;
  const Matrix a6 = a4 * a2;
  const Matrix u = as * (a6 * (b13[13] * a6 + b13[11] * a4 + b13[9] * a2) + b13[7] * a6 +
                         b13[5] * a4 + b13[3] * a2 + b13[1] * id);
  const Matrix v = a6 * (b13[12] * a6 + b13[10] * a4 + b13[8] * a2) + b13[6] * a6 +
                   b13[4] * a4 + b13[2] * a2 + b13[0] * id;
  Matrix r = solve(u, v);
  for (int i = 0; i < squarings; ++i) {
    r = r * r;
  }
  return r;
}

}  // namespace guas
