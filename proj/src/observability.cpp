#include "guas/observability.hpp"

#include "guas/error.hpp"
#include "guas/parallel.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

namespace guas {

namespace {

constexpr double kInvPhi = 0.6180339887498949;

struct ScalarMin {
  double lambda = 0.0;
  double value = kInf;
};

/// Golden-section search on [lo, hi] until the bracket is narrower than
/// `width`; returns the best point seen (the bracket ends included).
ScalarMin golden_section(const std::function<double(double)>& f, double lo, double hi,
                         double width, ScalarMin best) {
  auto consider = [&best](double x, double fx) {
    if (fx < best.value || (fx == best.value && x < best.lambda)) {
      best = {x, fx};
    }
  };
  double a = lo;
  double b = hi;
  double x1 = b - kInvPhi * (b - a);
  double x2 = a + kInvPhi * (b - a);
  double f1 = f(x1);
  double f2 = f(x2);
  consider(x1, f1);
  consider(x2, f2);
  while (b - a > width) {
    if (f1 <= f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - kInvPhi * (b - a);
      f1 = f(x1);
      consider(x1, f1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + kInvPhi * (b - a);
      f2 = f(x2);
      consider(x2, f2);
    }
  }
  return best;
}

struct GridMinimum {
  std::vector<double> grid;
  std::vector<double> values;
  std::vector<ScalarMin> refined;
  ScalarMin overall;
  bool resolution_ok = true;
};

/// Uniform grid on [0, 1] followed by golden-section refinement around every
/// local grid minimum below `refine_below`. Minima that end below
/// `polish_below` are refined again down to `polish_width`.
GridMinimum minimize_on_unit_interval(const std::function<double(double)>& f, int n_grid,
                                      double refine_width, double refine_below,
                                      double polish_below, double polish_width,
                                      double lipschitz) {
  if (n_grid < 2) {
    throw Error(ErrorCode::InvalidArgument, "n_grid must be at least 2");
  }
  GridMinimum out;
  const auto n = static_cast<std::size_t>(n_grid);
  out.grid.resize(n);
  out.values.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    out.grid[i] = static_cast<double>(i) / static_cast<double>(n - 1);
  }
  out.grid.back() = 1.0;
  parallel_for(n, [&](std::size_t i) { out.values[i] = f(out.grid[i]); });

  const double step = 1.0 / static_cast<double>(n - 1);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    if (std::abs(out.values[i + 1] - out.values[i]) > lipschitz * step * (1.0 + 1e-9) + 1e-12) {
      out.resolution_ok = false;
    }
  }

  for (std::size_t i = 0; i < n; ++i) {
    if (out.values[i] < out.overall.value) out.overall = {out.grid[i], out.values[i]};
  }

  for (std::size_t i = 0; i < n; ++i) {
    const bool left_ok = i == 0 || out.values[i] <= out.values[i - 1];
    const bool right_ok = i + 1 == n || out.values[i] <= out.values[i + 1];
    if (!left_ok || !right_ok || !(out.values[i] < refine_below)) continue;
    const double lo = out.grid[i == 0 ? 0 : i - 1];
    const double hi = out.grid[i + 1 == n ? n - 1 : i + 1];
    ScalarMin best = golden_section(f, lo, hi, refine_width, {out.grid[i], out.values[i]});
    if (best.value < polish_below) {
      const double half = refine_width;
      best = golden_section(f, std::max(0.0, best.lambda - half), std::min(1.0, best.lambda + half),
                            polish_width, best);
    }
    out.refined.push_back(best);
    if (best.value < out.overall.value ||
        (best.value == out.overall.value && best.lambda < out.overall.lambda)) {
      out.overall = best;
    }
  }
  return out;
}

}  // namespace

std::string_view to_string(SweepVerdict v) {
  switch (v) {
    case SweepVerdict::ObservableForAll: return "observable_for_all_lambda";
    case SweepVerdict::FailsAt: return "fails_at";
    case SweepVerdict::Inconclusive: return "inconclusive";
  }
  return "inconclusive";
}

Matrix kalman_matrix(const Matrix& c, const Matrix& a) {
  if (a.rows() != a.cols() || c.cols() != a.rows()) {
    throw Error(ErrorCode::DimensionMismatch,
                "kalman_matrix: C is " + std::to_string(c.rows()) + "x" + std::to_string(c.cols()) +
                    ", A is " + std::to_string(a.rows()) + "x" + std::to_string(a.cols()));
  }
  const Eigen::Index k = a.rows();
  const Eigen::Index kp = c.rows();
  Matrix out(k * kp, k);
  Matrix block = c;
  for (Eigen::Index j = 0; j < k; ++j) {
    out.middleRows(j * kp, kp) = block;
    if (j + 1 < k) block = block * a;
  }
  return out;
}

PairObservability pair_observable(const Matrix& c, const Matrix& a, double tol) {
  const Matrix kal = kalman_matrix(c, a);
  const Eigen::Index k = a.rows();
  PairObservability out;
  if (k == 0) {
    out.observable = true;
    out.sigma_min = kInf;
    return out;
  }
  double sigma_max = 0.0;
  if (kal.rows() > 0) sigma_max = spectral_norm(kal);
  out.threshold = tol * std::max(1.0, sigma_max);
  out.sigma_min = kal.rows() > 0 ? smallest_singular_value(kal) : 0.0;
  const NullSpace ns = null_space_abs(kal, out.threshold);
  out.observable = ns.basis.cols() == 0;
  if (!out.observable) out.unobservable_basis = ns.basis;
  return out;
}

double kalman_sigma_min(const BlockFamily& blocks, double lambda) {
  if (blocks.k() == 0) return kInf;
  return smallest_singular_value(kalman_matrix(blocks.c(lambda), blocks.a(lambda)));
}

double kalman_lipschitz_bound(const BlockFamily& blocks) {
  const Eigen::Index k = blocks.k();
  if (k == 0) return 0.0;
  const double a = std::max(spectral_norm(blocks.a0), spectral_norm(blocks.a1));
  const double c = std::max(spectral_norm(blocks.c0), spectral_norm(blocks.c1));
  const double da = spectral_norm(blocks.a1 - blocks.a0);
  const double dc = spectral_norm(blocks.c1 - blocks.c0);
  double sum = 0.0;
  for (Eigen::Index j = 0; j < k; ++j) {
    const double jd = static_cast<double>(j);
    const double term = dc * std::pow(a, jd) + (j > 0 ? jd * c * std::pow(a, jd - 1.0) * da : 0.0);
    sum += term * term;
  }
  return std::sqrt(sum);
}

ObservabilityReport sweep_lambda(const BlockFamily& blocks, const SweepOptions& options) {
  ObservabilityReport out;
  if (blocks.k() == 0) {
    out.verdict = SweepVerdict::ObservableForAll;
    out.margin = kInf;
    out.tol = options.tol;
    out.certification_threshold = 100.0 * options.tol;
    return out;
  }

  for (double lambda : {0.0, 0.5, 1.0}) {
    const Matrix kal = kalman_matrix(blocks.c(lambda), blocks.a(lambda));
    out.scale = std::max(out.scale, kal.rows() > 0 ? spectral_norm(kal) : 0.0);
  }
  out.tol = options.tol * out.scale;
  out.certification_threshold = 100.0 * out.tol;
  out.lipschitz = kalman_lipschitz_bound(blocks);

  auto f = [&blocks](double lambda) { return kalman_sigma_min(blocks, lambda); };
  const double step = 1.0 / (options.n_grid - 1);
  const GridMinimum gm = minimize_on_unit_interval(
      f, options.n_grid, options.refine_width,
      std::max(10.0 * out.certification_threshold, out.lipschitz * step),
      out.certification_threshold, options.polish_width, out.lipschitz);

  out.grid = gm.grid;
  out.sigma_min = gm.values;
  out.grid_resolution_ok = gm.resolution_ok;
  out.endpoint_sigma = {gm.values.front(), gm.values.back()};
  for (const ScalarMin& m : gm.refined) out.refined_minima.emplace_back(m.lambda, m.value);
  out.margin = gm.overall.value;
  out.margin_lambda = gm.overall.lambda;

  if (out.margin < out.tol) {
    out.verdict = SweepVerdict::FailsAt;
    out.lambda_star = out.margin_lambda;
    const Matrix kal = kalman_matrix(blocks.c(out.margin_lambda), blocks.a(out.margin_lambda));
    Eigen::JacobiSVD<Matrix> svd(kal, Eigen::ComputeFullV);
    Matrix w = svd.matrixV().rightCols(1);
    fix_column_signs(w);
    out.witness = w.col(0);
  } else if (out.margin > out.certification_threshold) {
    out.verdict = SweepVerdict::ObservableForAll;
  } else {
    out.verdict = SweepVerdict::Inconclusive;
  }
  return out;
}

std::pair<double, double> min_sigma_c(const BlockFamily& blocks, const SweepOptions& options) {
  if (blocks.k() == 0) return {kInf, 0.0};
  if (blocks.k_prime() < blocks.k()) return {0.0, 0.0};
  auto f = [&blocks](double lambda) { return smallest_singular_value(blocks.c(lambda)); };
  const double lip = spectral_norm(blocks.c1 - blocks.c0);
  const double scale = std::max({1.0, spectral_norm(blocks.c0), spectral_norm(blocks.c1)});
  const double tol = options.tol * scale;
  const double cert = 100.0 * tol;
  const GridMinimum gm =
      minimize_on_unit_interval(f, options.n_grid, options.refine_width,
                                std::max(10.0 * cert, lip / (options.n_grid - 1)), cert,
                                options.polish_width, lip);
  return {gm.overall.value, gm.overall.lambda};
}

HurwitzObservabilityCheck hurwitz_observability_crosscheck(const Matrix& b, double tol,
                                                           double marginal_band) {
  const Matrix s = symmetric_part(b);
  const SemidefVerdict sv = check_nonpositive(s, tol);
  if (!sv.holds) {
    throw Error(ErrorCode::NoCommonWeakLyapunov,
                "B^T + B has eigenvalue " + std::to_string(sv.max_eigenvalue));
  }
  const NullSpace ns = null_space(s, tol);
  const Matrix& kb = ns.basis;
  const Matrix& kp = ns.complement;
  Matrix a = kb.transpose() * b * kb;
  a = (0.5 * (a - a.transpose())).eval();
  const Matrix c = kp.transpose() * b * kb;
  const Matrix d = kp.transpose() * b * kp;
  if (d.rows() > 0) {
    const double top = max_symmetric_eigen(d + d.transpose()).value;
    if (!(top < -semidef_tolerance(s, tol))) {
      throw Error(ErrorCode::StructureViolation,
                  "D^T + D is not negative definite on the complement of ker(B^T + B)");
    }
  }
  HurwitzObservabilityCheck out;
  out.kernel_dim = kb.cols();
  const double zero = 64.0 * std::numeric_limits<double>::epsilon() * (1.0 + spectral_norm(b));
  out.hurwitz = is_hurwitz(b, zero);
  out.observability = pair_observable(c, a, tol);
  out.marginal = out.hurwitz.abscissa >= -marginal_band && out.hurwitz.hurwitz;
  out.agree = out.hurwitz.hurwitz == out.observability.observable;
  return out;
}

}  // namespace guas
