#include "guas/bad_locus.hpp"

#include "guas/error.hpp"
#include "guas/parallel.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <random>
#include <sstream>

namespace guas {

namespace {

struct Outputs {
  Vector u;  // C0 x
  Vector v;  // C1 x
};

Outputs outputs(const LocusGeometry& geom, const Vector& x) {
  return {geom.blocks.c0 * x, geom.blocks.c1 * x};
}

/// lambda minimizing |(1 - lambda) w0 + lambda w1| over [0, 1]
double affine_argmin(const Vector& w0, const Vector& w1) {
  const Vector diff = w0 - w1;
  const double dd = diff.squaredNorm();
  if (dd == 0.0) return 0.0;
  return std::clamp(diff.dot(w0) / dd, 0.0, 1.0);
}

/// lambda used by the tangency residual: lambda(x) off the diagonal u = v,
/// the affine minimizer of the tangency expression otherwise.
double residual_lambda(const LocusGeometry& geom, const Vector& x, const Outputs& o) {
  const Vector d = o.u - o.v;
  const double dd = d.squaredNorm();
  if (std::sqrt(dd) > 1e-12 * geom.scale) {
    return std::clamp(d.dot(o.u) / dd, 0.0, 1.0);
  }
  return affine_argmin(tangency_expression(geom, x, 0.0), tangency_expression(geom, x, 1.0));
}

/// Stacked residual vanishing exactly on G (unit x).
Vector residual_vector(const LocusGeometry& geom, const Vector& x) {
  const Outputs o = outputs(geom, x);
  const Vector w = wedge(o.u, o.v);
  const Vector t = tangency_expression(geom, x, residual_lambda(geom, x, o));
  Vector r(w.size() + 1 + t.size());
  r << w, std::max(0.0, o.u.dot(o.v)), t;
  return r;
}

Matrix tangent_basis(const Vector& x) {
  return canonical_basis(null_space_abs(x.transpose(), 1e-12).basis);
}

/// Levenberg-Marquardt on the sphere driving residual_vector to zero.
Vector polish_on_sphere(const LocusGeometry& geom, Vector x, double target) {
  x.normalize();
  double mu = 1e-3;
  Vector r = residual_vector(geom, x);
  for (int iter = 0; iter < 100 && r.norm() > target; ++iter) {
    const Matrix t = tangent_basis(x);
    const Eigen::Index m = t.cols();
    Matrix jac(r.size(), m);
    const double h = 1e-7;
    for (Eigen::Index j = 0; j < m; ++j) {
      const Vector xp = (x + h * t.col(j)).normalized();
      const Vector xm = (x - h * t.col(j)).normalized();
      jac.col(j) = (residual_vector(geom, xp) - residual_vector(geom, xm)) / (2.0 * h);
    }
    bool improved = false;
    for (int attempt = 0; attempt < 20; ++attempt) {
      const Matrix lhs = jac.transpose() * jac + mu * Matrix::Identity(m, m);
      const Vector step = lhs.ldlt().solve(-jac.transpose() * r);
      const Vector candidate = (x + t * step).normalized();
      const Vector rc = residual_vector(geom, candidate);
      if (rc.norm() < r.norm()) {
        x = candidate;
        r = rc;
        mu = std::max(mu * 0.3, 1e-15);
        improved = true;
        break;
      }
      mu *= 10.0;
    }
    if (!improved) break;
  }
  return x;
}

struct UnionFind {
  std::vector<std::size_t> parent;
  explicit UnionFind(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  std::size_t find(std::size_t i) {
    while (parent[i] != i) i = parent[i] = parent[parent[i]];
    return i;
  }
  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
};

std::vector<Vector> sphere_samples(Eigen::Index k, int resolution, double& spacing) {
  std::vector<Vector> out;
  if (k == 1) {
    out.push_back(Vector::Constant(1, 1.0));
    out.push_back(Vector::Constant(1, -1.0));
    spacing = 0.0;
  } else if (k == 2) {
    const int n = resolution;
    for (int i = 0; i < n; ++i) {
      const double th = 2.0 * std::numbers::pi * i / n;
      Vector x(2);
      x << std::cos(th), std::sin(th);
      out.push_back(x);
    }
    spacing = std::numbers::pi / n;
  } else if (k == 3) {
    const int n = resolution * resolution;
    const double golden_angle = std::numbers::pi * (3.0 - std::sqrt(5.0));
    for (int i = 0; i < n; ++i) {
      const double z = 1.0 - (2.0 * i + 1.0) / n;
      const double rho = std::sqrt(std::max(0.0, 1.0 - z * z));
      const double phi = golden_angle * i;
      Vector x(3);
      x << rho * std::cos(phi), rho * std::sin(phi), z;
      out.push_back(x);
    }
    spacing = std::sqrt(4.0 * std::numbers::pi / n);
  } else if (k > 3) {
    const double target = std::pow(static_cast<double>(resolution), static_cast<double>(k - 1));
    const auto n = static_cast<std::size_t>(std::min(target, 20000.0));
    std::mt19937_64 rng(0x5eed);
    std::normal_distribution<double> gauss;
    for (std::size_t i = 0; i < n; ++i) {
      Vector x(k);
      for (Eigen::Index j = 0; j < k; ++j) x(j) = gauss(rng);
      out.push_back(x.normalized());
    }
    spacing = std::pow(1.0 / static_cast<double>(n), 1.0 / static_cast<double>(k - 1)) * 2.0;
  }
  return out;
}

std::vector<std::pair<std::size_t, std::size_t>> neighbor_edges(Eigen::Index k,
                                                                const std::vector<Vector>& xs,
                                                                double spacing) {
  std::vector<std::pair<std::size_t, std::size_t>> edges;
  const std::size_t n = xs.size();
  if (k == 2) {
    for (std::size_t i = 0; i < n; ++i) edges.emplace_back(i, (i + 1) % n);
  } else if (k == 3) {
    // z decreases linearly with the index on the Fibonacci lattice
    const double radius = 1.8 * spacing;
    const auto window = static_cast<std::size_t>(radius * static_cast<double>(n) / 2.0) + 2;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < std::min(n, i + window); ++j) {
        if ((xs[i] - xs[j]).norm() <= radius) edges.emplace_back(i, j);
      }
    }
  }
  return edges;
}

int pca_dimension(const std::vector<Vector>& pts, Eigen::Index k) {
  if (pts.size() < 2) return 0;
  Vector mean = Vector::Zero(k);
  for (const auto& p : pts) mean += p;
  mean /= static_cast<double>(pts.size());
  Matrix cov = Matrix::Zero(k, k);
  for (const auto& p : pts) cov += (p - mean) * (p - mean).transpose();
  Eigen::SelfAdjointEigenSolver<Matrix> es(cov, Eigen::EigenvaluesOnly);
  const double top = es.eigenvalues().maxCoeff();
  if (top <= 0.0) return 0;
  int dim = 0;
  for (Eigen::Index i = 0; i < k; ++i) {
    if (es.eigenvalues()(i) > 0.1 * top) ++dim;
  }
  return std::min<int>(dim, static_cast<int>(k - 1));
}

}  // namespace

LocusGeometry make_geometry(const BlockFamily& blocks, double tol) {
  LocusGeometry g;
  g.blocks = blocks;
  g.k = blocks.k();
  g.k_prime = blocks.k_prime();
  g.tol = tol;
  g.scale = 1.0 + std::max(blocks.c0.size() ? spectral_norm(blocks.c0) : 0.0,
                           blocks.c1.size() ? spectral_norm(blocks.c1) : 0.0);
  if (g.k > 0) {
    Matrix stacked(2 * g.k_prime, g.k);
    stacked << blocks.c0, blocks.c1;
    g.n_basis = null_space(stacked, tol).basis;
  } else {
    g.n_basis.resize(0, 0);
  }
  return g;
}

Vector wedge(const Vector& u, const Vector& v) {
  if (u.size() != v.size()) {
    throw Error(ErrorCode::DimensionMismatch, "wedge of vectors with different lengths");
  }
  const Eigen::Index n = u.size();
  Vector out(n * (n - 1) / 2);
  Eigen::Index idx = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      out(idx++) = u(i) * v(j) - u(j) * v(i);
    }
  }
  return out;
}

bool colinear_opposite(const Vector& u, const Vector& v, double tol) {
  const double nn = u.norm() * v.norm();
  return wedge(u, v).norm() <= tol * (1.0 + nn) && u.dot(v) <= tol;
}

bool in_F(const LocusGeometry& geom, const Vector& x, double tol) {
  const double nx = x.norm();
  if (nx == 0.0) return true;
  const Outputs o = outputs(geom, x / nx);
  return colinear_opposite(o.u, o.v, tol);
}

bool in_F_inner(const LocusGeometry& geom, const Vector& x, double tol) {
  const double nx = x.norm();
  if (nx == 0.0) return true;
  const Outputs o = outputs(geom, x / nx);
  const double nn = o.u.norm() * o.v.norm();
  if (nn == 0.0) return true;
  // |u ^ v|^2 = (nn - <u, v>)(nn + <u, v>), and nn - <u, v> is close to 2 nn on F
  const double t = tol * (1.0 + nn);
  const double limit =
      std::max(t * t / (2.0 * nn), 8.0 * std::numeric_limits<double>::epsilon() * nn);
  return o.u.dot(o.v) + nn <= limit;
}

bool in_N(const LocusGeometry& geom, const Vector& x, double tol) {
  const double nx = x.norm();
  if (nx == 0.0) return true;
  const Outputs o = outputs(geom, x / nx);
  const double limit = tol * geom.scale;
  return o.u.norm() <= limit && o.v.norm() <= limit;
}

double lambda_of(const LocusGeometry& geom, const Vector& x, double tol) {
  if (in_N(geom, x, tol)) {
    throw Error(ErrorCode::InNullSpace, "lambda(x) is not unique on N = ker C0 /\\ ker C1");
  }
  if (!in_F(geom, x, tol)) {
    throw Error(ErrorCode::NotInF, "C0 x and C1 x are not colinear and opposite");
  }
  const Outputs o = outputs(geom, x / x.norm());
  const Vector d = o.u - o.v;
  const double raw = d.dot(o.u) / d.squaredNorm();
  if (raw < -1e-6 || raw > 1.0 + 1e-6) {
    throw Error(ErrorCode::NotInF, "lambda(x) = " + std::to_string(raw) + " outside [0, 1]");
  }
  const double lambda = std::clamp(raw, 0.0, 1.0);
  const double residual = ((1.0 - lambda) * o.u + lambda * o.v).norm();
  if (residual > 1e-6 * geom.scale) {
    throw Error(ErrorCode::InternalInconsistency,
                "C_lambda(x) x does not vanish (residual " + std::to_string(residual) + ")");
  }
  return lambda;
}

Vector tangency_expression(const LocusGeometry& geom, const Vector& x, double lambda) {
  const Matrix a = geom.blocks.a(lambda);
  const Vector ax = a * x;
  return wedge(geom.blocks.c0 * ax, geom.blocks.c1 * x) +
         wedge(geom.blocks.c0 * x, geom.blocks.c1 * ax);
}

GMembership in_G(const LocusGeometry& geom, const Vector& x, double tol) {
  GMembership out;
  if (!in_F(geom, x, tol)) return out;
  const Vector xu = x / x.norm();
  const double limit = tol * geom.scale * geom.scale;
  if (in_N(geom, xu, tol)) {
    out.in_n = true;
    const Vector w0 = tangency_expression(geom, xu, 0.0);
    const Vector w1 = tangency_expression(geom, xu, 1.0);
    if (w0.norm() <= limit && w1.norm() <= limit) {
      out.member = true;
      out.lambda = 0.0;
      out.residual = w0.norm();
      return out;
    }
    if (colinear_opposite(w0, w1, limit)) {
      const double lambda = affine_argmin(w0, w1);
      out.lambda = lambda;
      out.residual = ((1.0 - lambda) * w0 + lambda * w1).norm();
      out.member = out.residual < limit;
    }
    return out;
  }
  const double lambda = lambda_of(geom, xu, tol);
  out.lambda = lambda;
  out.residual = tangency_expression(geom, xu, lambda).norm();
  out.member = out.residual < limit;
  return out;
}

double g_residual(const LocusGeometry& geom, const Vector& x) {
  const Outputs o = outputs(geom, x);
  const double rf = wedge(o.u, o.v).norm() + std::max(0.0, o.u.dot(o.v));
  const double g = tangency_expression(geom, x, residual_lambda(geom, x, o)).norm();
  return (rf + g) / (geom.scale * geom.scale);
}

std::string_view to_string(GVerdict v) {
  switch (v) {
    case GVerdict::Discrete: return "discrete";
    case GVerdict::NotDiscrete: return "not_discrete";
    case GVerdict::Inconclusive: return "inconclusive";
  }
  return "inconclusive";
}

GScanLevel scan_G_level(const LocusGeometry& geom, int resolution, double tol) {
  GScanLevel level;
  level.resolution = resolution;
  const Eigen::Index k = geom.k;
  if (k == 0) return level;
  level.samples = sphere_samples(k, resolution, level.spacing);
  const std::size_t n = level.samples.size();
  level.residuals.resize(n);

  if (k == 1) {
    for (std::size_t i = 0; i < n; ++i) {
      const GMembership m = in_G(geom, level.samples[i], tol);
      level.residuals[i] = m.member ? 0.0 : kInf;
      if (m.member) {
        level.hits.push_back(i);
        GCluster c;
        c.members = {i};
        c.anchor = level.samples[i];
        c.anchor_residual = m.residual;
        c.touches_n = m.in_n;
        level.clusters.push_back(std::move(c));
      }
    }
    return level;
  }

  parallel_for(n, [&](std::size_t i) { level.residuals[i] = g_residual(geom, level.samples[i]); });

  const auto edges = neighbor_edges(k, level.samples, level.spacing);
  double slope = 0.0;
  for (const auto& [i, j] : edges) {
    const double dist = (level.samples[i] - level.samples[j]).norm();
    if (dist > 0.0) {
      slope = std::max(slope, std::abs(level.residuals[i] - level.residuals[j]) / dist);
    }
  }
  if (k > 3) {
    // no neighbour graph; a crude slope bound from the geometry scale
    slope = 4.0;
  }
  level.band = slope * level.spacing + tol;
  std::vector<bool> hit(n, false);
  for (std::size_t i = 0; i < n; ++i) {
    if (level.residuals[i] <= level.band) {
      hit[i] = true;
      level.hits.push_back(i);
    }
  }
  if (k > 3) return level;

  UnionFind uf(n);
  for (const auto& [i, j] : edges) {
    if (hit[i] && hit[j]) uf.unite(i, j);
  }
  std::vector<std::vector<std::size_t>> groups;
  std::vector<std::ptrdiff_t> group_of(n, -1);
  for (std::size_t i : level.hits) {
    const std::size_t root = uf.find(i);
    if (group_of[root] < 0) {
      group_of[root] = static_cast<std::ptrdiff_t>(groups.size());
      groups.emplace_back();
    }
    groups[static_cast<std::size_t>(group_of[root])].push_back(i);
  }

  const Matrix n_proj = geom.n_basis.cols() > 0
                            ? Matrix(geom.n_basis * geom.n_basis.transpose())
                            : Matrix::Zero(k, k);
  const double target = 0.1 * tol;
  for (auto& members : groups) {
    std::vector<std::size_t> order = members;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return level.residuals[a] < level.residuals[b];
    });
    GCluster cluster;
    const std::size_t tries = std::min<std::size_t>(5, order.size());
    for (std::size_t t = 0; t < tries; ++t) {
      const Vector candidate = polish_on_sphere(geom, level.samples[order[t]], target);
      const GMembership m = in_G(geom, candidate, tol);
      if (in_F(geom, candidate, tol) && m.member) {
        cluster.anchor = candidate;
        cluster.anchor_residual = m.residual;
        break;
      }
    }
    if (cluster.anchor.size() == 0) {
      ++level.discarded_clusters;
      continue;
    }
    std::vector<Vector> pts;
    pts.reserve(members.size());
    for (std::size_t i : members) pts.push_back(level.samples[i]);
    double diam = 0.0;
    for (std::size_t a = 0; a < pts.size(); ++a) {
      for (std::size_t b = a + 1; b < pts.size(); ++b) {
        diam = std::max(diam, (pts[a] - pts[b]).norm());
      }
    }
    cluster.diameter = diam;
    cluster.extent = diam + level.spacing;
    cluster.dimension_estimate = pca_dimension(pts, k);
    if (geom.n_basis.cols() > 0) {
      for (const auto& p : pts) {
        if ((p - n_proj * p).norm() <= 2.0 * level.spacing) {
          cluster.touches_n = true;
          break;
        }
      }
    }
    cluster.members = std::move(members);
    level.clusters.push_back(std::move(cluster));
  }
  return level;
}

GScanReport scan_G(const LocusGeometry& geom, int resolution, double tol) {
  GScanReport report;
  const Eigen::Index k = geom.k;
  report.coarse = scan_G_level(geom, resolution, tol);
  if (k == 0) {
    report.verdict = GVerdict::Discrete;
    report.notes.emplace_back("K = {0}: the sphere is empty");
    return report;
  }
  if (k == 1) {
    report.fine = report.coarse;
    report.verdict = GVerdict::Discrete;
    report.notes.emplace_back("dim K = 1: the sphere consists of two points");
    return report;
  }
  report.fine = scan_G_level(geom, 2 * resolution, tol);
  if (k > 3) {
    report.verdict = GVerdict::Inconclusive;
    report.notes.emplace_back("dim K > 3: sphere sampling is too sparse to certify discreteness");
    return report;
  }

  const GScanLevel& coarse = report.coarse;
  const GScanLevel& fine = report.fine;
  std::vector<bool> fine_matched(fine.clusters.size(), false);
  bool persistent = false;
  bool all_shrink = true;
  for (const GCluster& c : coarse.clusters) {
    double worst = 0.0;
    int worst_dim = 0;
    bool matched = false;
    for (std::size_t f = 0; f < fine.clusters.size(); ++f) {
      const GCluster& fc = fine.clusters[f];
      bool near = false;
      for (std::size_t i : c.members) {
        for (std::size_t j : fc.members) {
          if ((coarse.samples[i] - fine.samples[j]).norm() <= 2.0 * coarse.spacing) {
            near = true;
            break;
          }
        }
        if (near) break;
      }
      if (!near) continue;
      matched = true;
      fine_matched[f] = true;
      const double ratio = fc.extent / c.extent;
      if (ratio > worst) {
        worst = ratio;
        worst_dim = fc.dimension_estimate;
      }
    }
    if (!matched) {
      report.notes.emplace_back("a coarse cluster has no counterpart at the finer resolution");
      all_shrink = false;
    }
    report.shrink_ratios.push_back(worst);
    if (worst > 0.75) {
      all_shrink = false;
      if (worst_dim >= 1) persistent = true;
    }
  }
  for (std::size_t f = 0; f < fine.clusters.size(); ++f) {
    if (!fine_matched[f] && fine.clusters[f].extent > 3.0 * fine.spacing) {
      all_shrink = false;
      report.notes.emplace_back("an extended cluster appears only at the finer resolution");
    }
  }
  for (const GCluster& c : fine.clusters) {
    if (c.touches_n) {
      report.notes.emplace_back(
          "a cluster touches N, where tangency to F is only meant in a weak sense");
      break;
    }
  }
  if (persistent) {
    report.verdict = GVerdict::NotDiscrete;
  } else if (all_shrink) {
    report.verdict = GVerdict::Discrete;
  } else {
    report.verdict = GVerdict::Inconclusive;
  }
  return report;
}

std::string_view to_string(SmallKernelCase c) {
  switch (c) {
    case SmallKernelCase::OneDimensional: return "one_dimensional_kernel";
    case SmallKernelCase::RankAboveOne: return "rank_C_above_one";
    case SmallKernelCase::SharedKernel: return "shared_kernel";
    case SmallKernelCase::CommonRotation: return "common_rotation_direction";
    case SmallKernelCase::RotationVanishes: return "rotation_vanishes";
    case SmallKernelCase::OutputVanishes: return "output_vanishes";
  }
  return "unknown";
}

SmallKernelClassification kpetit_classify(const BlockFamily& blocks,
                                          const ObservabilityReport& obs) {
  const Eigen::Index k = blocks.k();
  if (k > 2) {
    throw Error(ErrorCode::DimensionTooLarge,
                "dim K = " + std::to_string(k) + "; the classification needs dim K <= 2");
  }
  SmallKernelClassification out;
  out.uniformly_observable = obs.verdict == SweepVerdict::ObservableForAll;
  std::ostringstream detail;
  if (k <= 1) {
    out.diagnostic = SmallKernelCase::OneDimensional;
    if (k == 0) {
      detail << "K = {0}; nothing to observe";
    } else {
      const LocusGeometry geom = make_geometry(blocks);
      const bool killed = in_F(geom, Vector::Ones(1));
      detail << "the unit sphere of K is two points; some lambda kills C_lambda e1: "
             << (killed ? "yes" : "no");
    }
    out.detail = detail.str();
    return out;
  }

  const double tol = obs.tol > 0.0 ? obs.tol : kDefaultTol;
  double max_second = 0.0;
  double min_first = kInf;
  for (int i = 0; i <= 256; ++i) {
    const double lambda = i / 256.0;
    const Matrix c = blocks.c(lambda);
    if (c.rows() == 0) {
      min_first = 0.0;
      continue;
    }
    Eigen::JacobiSVD<Matrix> svd(c);
    const Vector s = svd.singularValues();
    min_first = std::min(min_first, s(0));
    if (s.size() > 1) max_second = std::max(max_second, s(1));
  }
  if (min_first <= tol || obs.verdict == SweepVerdict::FailsAt) {
    const double w0 = blocks.a0(0, 1);
    const double w1 = blocks.a1(0, 1);
    if (min_first <= tol) {
      out.diagnostic = SmallKernelCase::OutputVanishes;
      detail << "C_lambda vanishes for some lambda";
    } else if (w0 * w1 <= 0.0) {
      out.diagnostic = SmallKernelCase::RotationVanishes;
      detail << "rotation rates " << w0 << " and " << w1
             << " are opposite or zero, so A_lambda vanishes for some lambda";
    } else {
      out.diagnostic = SmallKernelCase::RankAboveOne;
      detail << "the constant-input pair fails at lambda = " << obs.lambda_star.value_or(-1.0);
    }
    out.detail = detail.str();
    return out;
  }
  if (max_second > tol) {
    out.diagnostic = SmallKernelCase::RankAboveOne;
    detail << "rank C_lambda = 2 except at isolated lambda; bad trajectories reduce to "
              "constant inputs";
    out.detail = detail.str();
    return out;
  }
  auto row_direction = [](const Matrix& c) -> Vector {
    Eigen::JacobiSVD<Matrix> svd(c, Eigen::ComputeFullV);
    return svd.matrixV().col(0);
  };
  const Vector r0 = row_direction(blocks.c0);
  const Vector r1 = row_direction(blocks.c1);
  const double cross = r0(0) * r1(1) - r0(1) * r1(0);
  if (std::abs(cross) <= std::sqrt(tol)) {
    out.diagnostic = SmallKernelCase::SharedKernel;
    detail << "ker C0 = ker C1; a bad trajectory stays on that line and is a single point";
  } else {
    const double w0 = blocks.a0(0, 1);
    const double w1 = blocks.a1(0, 1);
    if (w0 * w1 > 0.0) {
      out.diagnostic = SmallKernelCase::CommonRotation;
      detail << "ker C0 != ker C1, common rotation direction (rates " << w0 << ", " << w1
             << "): every trajectory runs around the circle and leaves F";
    } else {
      out.diagnostic = SmallKernelCase::RotationVanishes;
      detail << "ker C0 != ker C1, rotation rates " << w0 << " and " << w1
             << " are opposite or zero, so A_lambda vanishes for some lambda";
    }
  }
  out.detail = detail.str();
  return out;
}

}  // namespace guas
