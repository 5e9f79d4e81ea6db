#include "guas/matrix_core.hpp"

#include "guas/error.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <numbers>

namespace guas {

namespace {

std::string shape(const Matrix& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

Matrix lyapunov_form(const Matrix& b, const Matrix& p) {
  const Matrix m = b.transpose() * p + p * b;
  return 0.5 * (m + m.transpose());
}

double strict_objective(const MatrixPair& pair, double q, double r) {
  Matrix p(2, 2);
  p << 1.0, q, q, r;
  const double l0 = max_symmetric_eigen(lyapunov_form(pair.b0, p)).value;
  const double l1 = max_symmetric_eigen(lyapunov_form(pair.b1, p)).value;
  return std::max(l0, l1);
}

}  // namespace

MatrixPair make_pair(Matrix b0, Matrix b1, std::optional<Matrix> p, double tol) {
  if (b0.rows() != b0.cols() || b0.rows() < 1) {
    throw Error(ErrorCode::DimensionMismatch, "B0 must be square and non-empty, got " + shape(b0));
  }
  if (b1.rows() != b0.rows() || b1.cols() != b0.cols()) {
    throw Error(ErrorCode::DimensionMismatch,
                "B1 is " + shape(b1) + " but B0 is " + shape(b0));
  }
  if (p) {
    if (p->rows() != b0.rows() || p->cols() != b0.cols()) {
      throw Error(ErrorCode::DimensionMismatch, "P is " + shape(*p) + " but B0 is " + shape(b0));
    }
    validate_spd(*p, tol);
  }
  return MatrixPair{std::move(b0), std::move(b1), std::move(p)};
}

Matrix symmetric_part(const Matrix& b) {
  if (b.rows() != b.cols()) {
    throw Error(ErrorCode::DimensionMismatch, "symmetric_part needs a square matrix");
  }
  Matrix s = b.transpose() + b;
  return 0.5 * (s + s.transpose());
}

double semidef_tolerance(const Matrix& s, double tol) { return tol * (1.0 + s.norm()); }

SemidefVerdict check_nonpositive(const Matrix& s, double tol) {
  SemidefVerdict v;
  v.tolerance = semidef_tolerance(s, tol);
  const ExtremeEigen top = max_symmetric_eigen(s);
  v.max_eigenvalue = top.value;
  v.holds = top.value <= v.tolerance;
  if (!v.holds) {
    v.witness = top.vector;
  }
  return v;
}

void validate_spd(const Matrix& p, double tol) {
  if (p.rows() != p.cols()) {
    throw Error(ErrorCode::NotPositiveDefinite, "P must be square, got " + shape(p));
  }
  const double asym = (p - p.transpose()).norm();
  if (asym > tol * (1.0 + p.norm())) {
    throw Error(ErrorCode::NotPositiveDefinite,
                "P is not symmetric (||P - P^T||_F = " + std::to_string(asym) + ")");
  }
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (p + p.transpose()), Eigen::EigenvaluesOnly);
  const double smallest = es.eigenvalues()(0);
  if (!(smallest > 0.0)) {
    throw Error(ErrorCode::NotPositiveDefinite,
                "P has eigenvalue " + std::to_string(smallest) + " <= 0");
  }
}

std::pair<SemidefVerdict, SemidefVerdict> check_weak_lyapunov(const MatrixPair& pair,
                                                              const Matrix& p, double tol) {
  if (p.rows() != pair.dim() || p.cols() != pair.dim()) {
    throw Error(ErrorCode::DimensionMismatch, "P is " + shape(p) + " for a pair of dimension " +
                                                  std::to_string(pair.dim()));
  }
  validate_spd(p, tol);
  return {check_nonpositive(lyapunov_form(pair.b0, p), tol),
          check_nonpositive(lyapunov_form(pair.b1, p), tol)};
}

NormalizedPair normalize(const MatrixPair& pair, const Matrix& p, double tol) {
  const auto [v0, v1] = check_weak_lyapunov(pair, p, tol);
  if (!v0.holds || !v1.holds) {
    const int bad = v0.holds ? 1 : 0;
    const SemidefVerdict& v = v0.holds ? v1 : v0;
    throw Error(ErrorCode::NoCommonWeakLyapunov,
                "B" + std::to_string(bad) + "^T P + P B" + std::to_string(bad) +
                    " has eigenvalue " + std::to_string(v.max_eigenvalue) + " > tolerance " +
                    std::to_string(v.tolerance));
  }

  NormalizedPair out;
  const Eigen::Index d = pair.dim();
  out.provenance.p = p;
  out.provenance.identity = (p - Matrix::Identity(d, d)).norm() == 0.0;
  if (out.provenance.identity) {
    out.provenance.sqrt_p = Matrix::Identity(d, d);
    out.provenance.inv_sqrt_p = Matrix::Identity(d, d);
    out.b0 = pair.b0;
    out.b1 = pair.b1;
  } else {
    const SpdRoots roots = spd_roots(p);
    out.provenance.sqrt_p = roots.sqrt;
    out.provenance.inv_sqrt_p = roots.inv_sqrt;
    out.b0 = roots.sqrt * pair.b0 * roots.inv_sqrt;
    out.b1 = roots.sqrt * pair.b1 * roots.inv_sqrt;
  }
  out.s0 = symmetric_part(out.b0);
  out.s1 = symmetric_part(out.b1);
  return out;
}

NormalizedPair normalize(const MatrixPair& pair, double tol) {
  if (pair.p) return normalize(pair, *pair.p, tol);
  return normalize(pair, Matrix::Identity(pair.dim(), pair.dim()), tol);
}

HurwitzResult is_hurwitz(const Matrix& b, double tol) {
  if (b.rows() != b.cols()) {
    throw Error(ErrorCode::DimensionMismatch, "is_hurwitz needs a square matrix");
  }
  HurwitzResult out;
  if (b.rows() == 0) {
    out.abscissa = -kInf;
    out.hurwitz = true;
    return out;
  }
  Eigen::EigenSolver<Matrix> es(b, false);
  out.abscissa = es.eigenvalues().real().maxCoeff();
  out.hurwitz = out.abscissa < -tol;
  out.marginal = std::abs(out.abscissa) <= tol;
  return out;
}

Matrix convex_combination(const Matrix& b0, const Matrix& b1, double lambda) {
  if (!(lambda >= 0.0 && lambda <= 1.0)) {
    throw Error(ErrorCode::LambdaOutOfRange, "lambda = " + std::to_string(lambda));
  }
  if (lambda == 0.0) return b0;
  if (lambda == 1.0) return b1;
  return (1.0 - lambda) * b0 + lambda * b1;
}

Matrix convex_combination(const NormalizedPair& pair, double lambda) {
  return convex_combination(pair.b0, pair.b1, lambda);
}

ConicReport det_conic(const Matrix& b, int n_samples) {
  if (b.rows() != 2 || b.cols() != 2) {
    throw Error(ErrorCode::DimensionMismatch, "det_conic needs a 2x2 matrix");
  }
  // M(q, r) = L(E11) + q L(E12 + E21) + r L(E22) with L(X) = B^T X + X B.
  Matrix e11 = Matrix::Zero(2, 2);
  e11(0, 0) = 1.0;
  Matrix eq = Matrix::Zero(2, 2);
  eq(0, 1) = eq(1, 0) = 1.0;
  Matrix er = Matrix::Zero(2, 2);
  er(1, 1) = 1.0;
  const Matrix al = lyapunov_form(b, e11);
  const Matrix be = lyapunov_form(b, eq);
  const Matrix ga = lyapunov_form(b, er);

  ConicReport out;
  auto& c = out.coefficients;
  c[0] = be(0, 0) * be(1, 1) - be(0, 1) * be(0, 1);
  c[1] = be(0, 0) * ga(1, 1) + ga(0, 0) * be(1, 1) - 2.0 * be(0, 1) * ga(0, 1);
  c[2] = ga(0, 0) * ga(1, 1) - ga(0, 1) * ga(0, 1);
  c[3] = al(0, 0) * be(1, 1) + be(0, 0) * al(1, 1) - 2.0 * al(0, 1) * be(0, 1);
  c[4] = al(0, 0) * ga(1, 1) + ga(0, 0) * al(1, 1) - 2.0 * al(0, 1) * ga(0, 1);
  c[5] = al(0, 0) * al(1, 1) - al(0, 1) * al(0, 1);

  Eigen::Matrix2d quad;
  quad << c[0], 0.5 * c[1], 0.5 * c[1], c[2];
  const Eigen::Vector2d lin(c[3], c[4]);
  if (quad.determinant() <= 0.0) {
    return out;
  }
  out.center = -0.5 * quad.inverse() * lin;
  const double at_center = c[5] + 0.5 * lin.dot(out.center);
  // Real ellipse iff the value at the centre has the opposite sign of the
  // (definite) quadratic part.
  const double quad_sign = quad(0, 0) > 0.0 ? 1.0 : -1.0;
  if (!(at_center * quad_sign < 0.0)) {
    return out;
  }
  out.is_ellipse = true;
  out.interior_positive = at_center > 0.0;

  const Eigen::Matrix2d shape_m = quad / (-at_center);  // positive definite
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(shape_m);
  out.major_axis = es.eigenvectors().col(0);
  if (out.major_axis(1) < 0.0 || (out.major_axis(1) == 0.0 && out.major_axis(0) < 0.0)) {
    out.major_axis = -out.major_axis;
  }
  const Eigen::Vector2d minor_axis = es.eigenvectors().col(1);
  out.semi_major = 1.0 / std::sqrt(es.eigenvalues()(0));
  out.semi_minor = 1.0 / std::sqrt(es.eigenvalues()(1));
  out.vertices[0] = out.center - out.semi_major * out.major_axis;
  out.vertices[1] = out.center + out.semi_major * out.major_axis;

  const Eigen::Matrix2d inv = shape_m.inverse();
  const double hq = std::sqrt(inv(0, 0));
  const double hr = std::sqrt(inv(1, 1));
  out.box = {out.center(0) - hq, out.center(0) + hq, out.center(1) - hr, out.center(1) + hr};

  out.samples.reserve(static_cast<std::size_t>(n_samples));
  for (int i = 0; i < n_samples; ++i) {
    const double th = 2.0 * std::numbers::pi * i / n_samples;
    out.samples.emplace_back(out.center + std::cos(th) * out.semi_major * out.major_axis +
                             std::sin(th) * out.semi_minor * minor_axis);
  }
  return out;
}

StrictLyapunovReport strict_lyapunov_2x2(const MatrixPair& pair,
                                         const StrictSearchOptions& options) {
  if (pair.dim() != 2) {
    throw Error(ErrorCode::DimensionMismatch,
                "strict_lyapunov_2x2 needs d = 2, got d = " + std::to_string(pair.dim()));
  }
  StrictLyapunovReport out;
  out.curves = {det_conic(pair.b0), det_conic(pair.b1)};
  out.restriction_note =
      "search restricted to P = [[1, q], [q, r]]; every positive definite P has P11 > 0 and "
      "P / P11 has this form, so the restriction only fixes the scale";

  // Feasibility needs det M_i > 0, so an ellipse with positive interior
  // bounds the feasible set.
  std::array<double, 4> box = {-options.default_q, options.default_q, 0.0, options.default_r};
  bool bounded = false;
  for (const ConicReport& c : out.curves) {
    if (!c.is_ellipse || !c.interior_positive) continue;
    if (!bounded) {
      box = c.box;
      bounded = true;
    } else {
      const std::array<double, 4> meet = {std::max(box[0], c.box[0]), std::min(box[1], c.box[1]),
                                          std::max(box[2], c.box[2]), std::min(box[3], c.box[3])};
      if (meet[0] <= meet[1] && meet[2] <= meet[3]) {
        box = meet;
      } else {
        // disjoint boxes: the search still reports the best value on the hull
        box = {std::min(box[0], c.box[0]), std::max(box[1], c.box[1]),
               std::min(box[2], c.box[2]), std::max(box[3], c.box[3])};
      }
    }
  }
  out.search_box = box;
  out.box_from_conics = bounded;

  // The objective max_i lambda_max(M_i(q, r)) is convex, as is the cone
  // r > q^2, so zooming on the best grid cell converges to the global minimum.
  auto evaluate = [&](double q, double r) -> double {
    if (!(r > q * q)) return kInf;
    return strict_objective(pair, q, r);
  };
  auto threshold_at = [&](double q, double r) {
    Matrix p(2, 2);
    p << 1.0, q, q, r;
    const double scale = std::max(lyapunov_form(pair.b0, p).norm(), lyapunov_form(pair.b1, p).norm());
    return options.tol * (1.0 + scale);
  };

  auto scan = [&](const std::array<double, 4>& b, int n) {
    for (int i = 0; i < n; ++i) {
      const double q = b[0] + (b[1] - b[0]) * i / (n - 1);
      for (int j = 0; j < n; ++j) {
        const double r = b[2] + (b[3] - b[2]) * j / (n - 1);
        const double f = evaluate(q, r);
        if (f < out.best_value) {
          out.best_value = f;
          out.best_point = {q, r};
        }
      }
    }
  };

  scan(box, options.coarse_grid);
  double half_q = 0.5 * (box[1] - box[0]) / (options.coarse_grid - 1) * 2.0;
  double half_r = 0.5 * (box[3] - box[2]) / (options.coarse_grid - 1) * 2.0;
  for (int level = 0; level < options.zoom_levels; ++level) {
    if (out.best_value < -threshold_at(out.best_point(0), out.best_point(1))) break;
    const std::array<double, 4> local = {out.best_point(0) - half_q, out.best_point(0) + half_q,
                                         out.best_point(1) - half_r, out.best_point(1) + half_r};
    scan(local, options.zoom_grid);
    half_q *= 0.5;
    half_r *= 0.5;
  }

  const double q = out.best_point(0);
  const double r = out.best_point(1);
  if (std::isfinite(out.best_value) && out.best_value < -threshold_at(q, r)) {
    out.qr = out.best_point;
    Matrix p(2, 2);
    p << 1.0, q, q, r;
    out.p = p;
    out.verdict = "strict common quadratic Lyapunov function found";
  } else {
    out.verdict = "no strict common quadratic Lyapunov function of this normalized form";
  }
  return out;
}

}  // namespace guas
